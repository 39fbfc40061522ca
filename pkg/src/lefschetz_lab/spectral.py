"""Spectral data of the flat boundaries and the K / star K splitting.

Forms on a boundary component (a flat n-torus of side 2 pi scale, or a
point when n = 0) are written in the parallel orthonormal coframe
``e_k = scale * dy_k``.  Harmonic q-forms have constant coefficients, so
a harmonic form is a vector in "harmonic coordinates": one entry per
(component, sorted index tuple I), the entry being the coefficient of
``e_I / sqrt(vol)``.  These coordinates are orthonormal for the L^2
product.

Non-harmonic eigenforms are real Fourier modes ``sqrt(2/vol) cos(k.y) v``
and ``sqrt(2/vol) sin(k.y) v`` with eigenvalue ``|k|^2 / scale^2``; ``v``
is a unit coefficient vector.  Parity (minus = Im d + K, plus =
Im d* + star K) of these modes depends only on the degree and on ``v``:
functions are coexact, top forms exact, and on the torus a 1-form is
exact when ``v`` is parallel to ``k`` and coexact when orthogonal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import erfc

from .catalog import BoundaryManifold, ModelManifold
from .forms import exterior_power
from .isometry import TWO_PI, BoundaryIsometry

TAIL_TOL = 1e-12
HARMONIC, COS, SIN = 0, 1, 2
MINUS, PLUS = -1, 1


class SpectralError(ValueError):
    pass


def index_tuples(n: int, q: int) -> List[Tuple[int, ...]]:
    return list(combinations(range(n), q))


def _perm_sign(seq: Sequence[int]) -> int:
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


# ---------------------------------------------------------------------------
# harmonic coordinates


def harmonic_labels(boundary: BoundaryManifold, q: int) -> List[Tuple[int, Tuple[int, ...]]]:
    return [(i, idx) for i in range(boundary.n_components) for idx in index_tuples(boundary.n, q)]


def component_volume(boundary: BoundaryManifold) -> float:
    return boundary.circumference ** boundary.n


def hodge_star(boundary: BoundaryManifold, q: int) -> np.ndarray:
    """Matrix of star_Y from harmonic q-coordinates to harmonic (n-q)-coordinates."""
    n = boundary.n
    src = harmonic_labels(boundary, q)
    dst = {lab: j for j, lab in enumerate(harmonic_labels(boundary, n - q))}
    out = np.zeros((len(dst), len(src)))
    for j, (i, idx) in enumerate(src):
        comp = tuple(k for k in range(n) if k not in idx)
        out[dst[(i, comp)], j] = boundary.components[i].orientation * _perm_sign(idx + comp)
    return out


def b_star_harmonic(boundary: BoundaryManifold, B: BoundaryIsometry, q: int) -> np.ndarray:
    """Pullback by B on harmonic q-coordinates."""
    labels = harmonic_labels(boundary, q)
    pos = {lab: j for j, lab in enumerate(labels)}
    out = np.zeros((len(labels), len(labels)))
    for r, (i, idx) in enumerate(labels):
        sign = 1
        for k in idx:
            sign *= B.signs[k]
        out[r, pos[(B.perm[i], idx)]] = sign
    return out


def b_star_matrix(boundary: BoundaryManifold, B: BoundaryIsometry, q: int, subspace: np.ndarray,
                  tol: float = 1e-10) -> np.ndarray:
    """Matrix of B* on the span of the orthonormal columns of ``subspace``.

    Raises SpectralError when the span is not B*-invariant.
    """
    v = np.asarray(subspace, float).reshape(len(harmonic_labels(boundary, q)), -1)
    full = b_star_harmonic(boundary, B, q)
    mat = v.T @ full @ v
    resid = np.max(np.abs(full @ v - v @ mat)) if v.size else 0.0
    if resid > tol:
        raise SpectralError(f"subspace is not invariant under B* (residual {resid:.2e})")
    return mat


def orientation_sign(boundary: BoundaryManifold, B: BoundaryIsometry) -> int:
    """+1 if B preserves the induced orientation of Y, -1 if it reverses it.

    B* of the volume form sum_i o_i e_top^(i) is computed component by
    component, so component permutations are accounted for.
    """
    det = 1
    for s in B.signs:
        det *= s
    o = boundary.orientations
    signs = {o[B.perm[i]] * o[i] * det for i in range(boundary.n_components)}
    if len(signs) != 1:
        raise SpectralError("B preserves orientation on some components and reverses it on others")
    return signs.pop()


# ---------------------------------------------------------------------------
# K split


@dataclass
class KSplit:
    """Bases (orthonormal columns in harmonic coordinates) of K^q and star K^(n-q)."""

    boundary: BoundaryManifold
    K: Dict[int, np.ndarray]
    starK: Dict[int, np.ndarray]
    projection_residual: float = 0.0

    @property
    def dim_K(self) -> int:
        return sum(v.shape[1] for v in self.K.values())

    @property
    def dim_starK(self) -> int:
        return sum(v.shape[1] for v in self.starK.values())

    def minus(self, q: int) -> np.ndarray:
        return self.K.get(q, np.zeros((len(harmonic_labels(self.boundary, q)), 0)))

    def plus(self, q: int) -> np.ndarray:
        return self.starK.get(q, np.zeros((len(harmonic_labels(self.boundary, q)), 0)))

    def b_on_K(self, B: BoundaryIsometry) -> Dict[int, np.ndarray]:
        return {q: b_star_matrix(self.boundary, B, q, v) for q, v in self.K.items()}

    def b_on_starK(self, B: BoundaryIsometry) -> Dict[int, np.ndarray]:
        return {q: b_star_matrix(self.boundary, B, q, v) for q, v in self.starK.items()}

    def trace_on_K(self, B: BoundaryIsometry) -> float:
        return float(sum(np.trace(m) for m in self.b_on_K(B).values()))

    def trace_on_starK(self, B: BoundaryIsometry) -> float:
        return float(sum(np.trace(m) for m in self.b_on_starK(B).values()))

    def orthogonality_residual(self) -> float:
        worst = 0.0
        for q, k in self.K.items():
            s = self.starK.get(q)
            if s is not None and k.size and s.size:
                worst = max(worst, float(np.max(np.abs(k.T @ s))))
        return worst

    def block_residual(self, B: BoundaryIsometry) -> float:
        """Largest off-diagonal block entry of B* on H(Y) = K + star K."""
        worst = 0.0
        for q in range(self.boundary.n + 1):
            basis = np.hstack([self.minus(q), self.plus(q)])
            if not basis.size:
                continue
            full = b_star_harmonic(self.boundary, B, q)
            mat = basis.T @ full @ basis
            a = self.minus(q).shape[1]
            if a and a < mat.shape[0]:
                worst = max(worst, float(np.max(np.abs(mat[:a, a:]))), float(np.max(np.abs(mat[a:, :a]))))
        return worst


def _orthonormal(cols: List[np.ndarray], dim: int) -> np.ndarray:
    if not cols:
        return np.zeros((dim, 0))
    a = np.stack(cols, axis=1)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    r = int(np.sum(s > 1e-10 * max(1.0, s[0])))
    basis = u[:, :r]
    # canonical sign: first nonzero entry positive
    for j in range(basis.shape[1]):
        nz = np.flatnonzero(np.abs(basis[:, j]) > 1e-12)
        if nz.size and basis[nz[0], j] < 0:
            basis[:, j] *= -1
    basis[np.abs(basis) < 1e-15] = 0.0
    return basis


def restrict_to_boundary(model: ModelManifold, form, samples: int = 16) -> Tuple[np.ndarray, float]:
    """Harmonic coordinates of the harmonic part of iota* form, and the
    largest deviation of the restriction from its harmonic part."""
    bd = model.boundary()
    n, q = bd.n, form.degree
    lam = model.scale
    vol = component_volume(bd)
    labels = harmonic_labels(bd, q)
    coords = np.zeros(len(labels))
    resid = 0.0
    if n == 0:
        grid = np.zeros((1, 0))
    else:
        ticks = TWO_PI * np.arange(samples) / samples
        grid = np.stack([g.ravel() for g in np.meshgrid(*([ticks] * n), indexing="ij")], axis=1)
    h = 1e-6
    for comp in range(bd.n_components):
        cvec = np.full(len(grid), comp)
        pts = model.from_collar(np.zeros(len(grid)), cvec, grid)
        tang = np.zeros((len(grid), model.dim, n))
        for k in range(n):
            dy = np.zeros(n)
            dy[k] = h
            tang[:, :, k] = model.chart_diff(model.from_collar(np.zeros(len(grid)), cvec, grid + dy),
                                             model.from_collar(np.zeros(len(grid)), cvec, grid - dy)) / (2 * h)
        for idx in index_tuples(n, q):
            vecs = tang[:, :, list(idx)] / lam  # metric-unit tangents
            vals = form.evaluate(pts, vecs)
            mean = float(np.mean(vals))
            resid = max(resid, float(np.max(np.abs(vals - mean))) if len(vals) else 0.0)
            coords[labels.index((comp, idx))] = mean * math.sqrt(vol)
    return coords, resid


def compute_k_split(model: ModelManifold, tol: float = 1e-8) -> KSplit:
    """K^q = harmonic parts of restrictions of the absolute generators (q < m)."""
    bd = model.boundary()
    n = bd.n
    K: Dict[int, np.ndarray] = {}
    worst = 0.0
    for q in range(n + 1):
        cols = []
        for form in model.generators("abs").get(q, []):
            coords, resid = restrict_to_boundary(model, form)
            worst = max(worst, resid)
            if np.linalg.norm(coords) > 1e-12:
                cols.append(coords)
        K[q] = _orthonormal(cols, len(harmonic_labels(bd, q)))
    if worst > tol:
        raise SpectralError(f"harmonic projection residual {worst:.2e} exceeds {tol:g}")
    starK: Dict[int, np.ndarray] = {q: np.zeros((len(harmonic_labels(bd, q)), 0)) for q in range(n + 1)}
    for q, v in K.items():
        if v.shape[1]:
            starK[n - q] = hodge_star(bd, q) @ v
    split = KSplit(bd, K, starK, worst)
    total = sum(bd.harmonic_dims())
    if 2 * split.dim_K != total or split.dim_K + split.dim_starK != total:
        raise SpectralError(f"dim K = {split.dim_K} is not half of dim H(Y) = {total}")
    return split


def compute_k0(model: ModelManifold, B: BoundaryIsometry, split: Optional[KSplit] = None) -> float:
    """0 for orientation preserving B, Tr(B* on K) otherwise."""
    bd = model.boundary()
    if orientation_sign(bd, B) == 1:
        return 0.0
    split = split or compute_k_split(model)
    return split.trace_on_K(B)


# ---------------------------------------------------------------------------
# spectral basis


@dataclass(frozen=True)
class SpectralLine:
    degree: int
    eigenvalue: float
    component: Optional[int]
    k: Tuple[int, ...]
    kind: str
    coeff: Tuple[float, ...]
    parity: str


def _half_lattice(n: int, kmax: int) -> np.ndarray:
    """Nonzero integer vectors with |k| <= kmax, one of each pair +-k."""
    if n == 1:
        return np.arange(1, kmax + 1).reshape(-1, 1)
    rng = np.arange(-kmax, kmax + 1)
    kk = np.stack([a.ravel() for a in np.meshgrid(rng, rng, indexing="ij")], axis=1)
    keep = (kk[:, 0] > 0) | ((kk[:, 0] == 0) & (kk[:, 1] > 0))
    kk = kk[keep]
    return kk[np.sum(kk * kk, axis=1) <= kmax * kmax]


@dataclass
class DegreeData:
    eig: np.ndarray      # (L,)
    comp: np.ndarray     # (L,) component, -1 for harmonic lines
    k: np.ndarray        # (L, n)
    kind: np.ndarray     # (L,) HARMONIC / COS / SIN
    coeff: np.ndarray    # (L, dim Lambda^q): unit coefficient vector (trig lines)
    harm: np.ndarray     # (L, n_harmonic): harmonic coordinates (harmonic lines)
    parity: np.ndarray   # (L,) MINUS / PLUS


class _LazyDegrees(dict):
    """Per-degree line tables, built on first access."""

    def __init__(self, build, n: int):
        super().__init__()
        self._build, self._n = build, n

    def __missing__(self, q: int) -> DegreeData:
        if not 0 <= q <= self._n:
            raise KeyError(q)
        self[q] = value = self._build(q)
        return value


class SpectralBasis:
    """Eigendata of the boundary Hodge Laplacian below ``cutoff``."""

    def __init__(self, boundary: BoundaryManifold, split: KSplit, cutoff: float):
        if cutoff <= 0:
            raise SpectralError("cutoff must be positive")
        self.boundary = boundary
        self.split = split
        self.cutoff = float(cutoff)
        self.volume = component_volume(boundary)
        self._bdiag: Dict[tuple, np.ndarray] = {}
        self.degrees: Dict[int, DegreeData] = _LazyDegrees(self._degree, boundary.n)

    def _degree(self, q: int) -> DegreeData:
        bd = self.boundary
        n, nc = bd.n, bd.n_components
        nq = len(index_tuples(n, q))
        nh = len(harmonic_labels(bd, q))
        # harmonic lines: K (minus) then star K (plus)
        hk, hs = self.split.minus(q), self.split.plus(q)
        harm = np.concatenate([hk.T, hs.T]).reshape(-1, nh)
        nharm = len(harm)
        parts = {
            "eig": [np.zeros(nharm)], "comp": [np.full(nharm, -1)], "k": [np.zeros((nharm, n), int)],
            "kind": [np.full(nharm, HARMONIC)], "coeff": [np.zeros((nharm, nq))], "harm": [harm],
            "parity": [np.array([MINUS] * hk.shape[1] + [PLUS] * hs.shape[1], int)],
        }
        if n:
            kmax = int(math.floor(bd.scale * math.sqrt(self.cutoff)))
            ks = _half_lattice(n, kmax)
            lam = np.sum(ks * ks, axis=1) / bd.scale ** 2
            keep = lam <= self.cutoff
            ks, lam = ks[keep], lam[keep]
            for comp in range(nc):
                for vec, par in self._coefficient_vectors(q, ks):
                    for kind in (COS, SIN):
                        L = len(ks)
                        parts["eig"].append(lam)
                        parts["comp"].append(np.full(L, comp))
                        parts["k"].append(ks)
                        parts["kind"].append(np.full(L, kind))
                        parts["coeff"].append(vec)
                        parts["harm"].append(np.zeros((L, nh)))
                        parts["parity"].append(np.full(L, par))
        cat = {key: np.concatenate(val) for key, val in parts.items()}
        keys = [cat["kind"]] + [cat["k"][:, j] for j in reversed(range(n))] + [cat["comp"], cat["eig"]]
        order = np.lexsort(keys)
        return DegreeData(**{key: val[order] for key, val in cat.items()})

    def _coefficient_vectors(self, q: int, k: np.ndarray):
        """Unit coefficient vectors for the lattice vectors ``k`` (rows), with parities."""
        n = self.boundary.n
        ones = np.ones((len(k), 1))
        if q == 0:
            return [(ones, PLUS)]
        if q == n:
            return [(ones, MINUS)]
        # n = 2, q = 1
        kn = k / np.linalg.norm(k, axis=1, keepdims=True)
        return [(kn, MINUS), (np.stack([-kn[:, 1], kn[:, 0]], axis=1), PLUS)]

    # -- views ---------------------------------------------------------------
    def lines(self, q: int) -> List[SpectralLine]:
        d = self.degrees[q]
        kinds = {HARMONIC: "harmonic", COS: "cos", SIN: "sin"}
        return [SpectralLine(q, float(d.eig[j]), None if d.comp[j] < 0 else int(d.comp[j]),
                             tuple(int(x) for x in d.k[j]), kinds[int(d.kind[j])],
                             tuple(float(x) for x in d.coeff[j]),
                             "minus" if d.parity[j] == MINUS else "plus")
                for j in range(len(d.eig))]

    def count(self, q: int, parity: Optional[int] = None) -> int:
        d = self.degrees[q]
        return int(len(d.eig) if parity is None else np.sum(d.parity == parity))

    def evaluate(self, q: int, comp: np.ndarray, y: np.ndarray, max_lines: Optional[int] = None) -> np.ndarray:
        """Eigenform coefficient values, shape (lines, points, dim Lambda^q)."""
        d = self.degrees[q]
        sl = slice(None, max_lines)
        comp = np.asarray(comp, int).reshape(-1)
        y = np.asarray(y, float).reshape(len(comp), self.boundary.n)
        nq = d.coeff.shape[1]
        eig_comp, kind, k = d.comp[sl], d.kind[sl], d.k[sl]
        phase = k @ y.T if self.boundary.n else np.zeros((len(eig_comp), len(comp)))
        trig = np.where((kind == COS)[:, None], np.cos(phase), np.sin(phase))
        trig = trig * (eig_comp[:, None] == comp[None, :]) * math.sqrt(2.0 / self.volume)
        vals = trig[:, :, None] * d.coeff[sl][:, None, :]
        harm = kind == HARMONIC
        if np.any(harm):
            labels = harmonic_labels(self.boundary, q)
            idx = index_tuples(self.boundary.n, q)
            hv = np.zeros((int(np.sum(harm)), len(comp), nq))
            for col, (i, I) in enumerate(labels):
                hv[:, :, idx.index(I)] += np.outer(d.harm[sl][harm][:, col], comp == i)
            vals[harm] = hv / math.sqrt(self.volume)
        return vals

    def gram(self, q: int, max_lines: int = 200, samples: int = 64) -> np.ndarray:
        """L^2 Gram matrix of the first ``max_lines`` eigenforms (trapezoid rule)."""
        bd = self.boundary
        if bd.n == 0:
            pts = np.zeros((1, 0))
            w = 1.0
        else:
            ticks = TWO_PI * np.arange(samples) / samples
            pts = np.stack([g.ravel() for g in np.meshgrid(*([ticks] * bd.n), indexing="ij")], axis=1)
            w = self.volume / len(pts)
        total = 0.0
        for comp in range(bd.n_components):
            vals = self.evaluate(q, np.full(len(pts), comp), pts, max_lines)
            total = total + w * np.einsum("apk,bpk->ab", vals, vals)
        return total

    # -- B action --------------------------------------------------------------
    def b_diagonal(self, B: BoundaryIsometry, q: int) -> np.ndarray:
        """<B* phi_j, phi_j> for every line of degree q (cached per isometry)."""
        key = (B.perm, B.signs, B.shift, q)
        cached = self._bdiag.get(key)
        if cached is not None:
            return cached
        d = self.degrees[q]
        n = self.boundary.n
        out = np.zeros(len(d.eig))
        harm = d.kind == HARMONIC
        if np.any(harm):
            full = b_star_harmonic(self.boundary, B, q)
            h = d.harm[harm]
            out[harm] = np.einsum("ji,ik,jk->j", h, full, h)
        trig = ~harm
        if np.any(trig):
            S = np.diag(np.array(B.signs, float))
            lam_q = exterior_power(S, q) if n else np.ones((1, 1))
            vv = np.einsum("ji,ik,jk->j", d.coeff[trig], lam_q, d.coeff[trig])
            k = d.k[trig]
            sk = k * np.array(B.signs)
            same = np.all(sk == k, axis=1)
            flip = np.all(sk == -k, axis=1) & ~same
            cb = np.cos(k @ np.array(B.shift, float))
            kind = d.kind[trig]
            t = np.where(same, cb, 0.0) + np.where(flip, np.where(kind == COS, cb, -cb), 0.0)
            comp = d.comp[trig]
            fixed = np.asarray(B.perm)[comp] == comp
            out[trig] = t * vv * fixed
        out.flags.writeable = False
        self._bdiag[key] = out
        return out

    def fixed_sublattice_trace(self, B: BoundaryIsometry, q: int, parity: Optional[int], t: float) -> float:
        """Tr(B* e^{-t Delta}) restricted to a parity (None for all).

        Only B-fixed components and lattice vectors with S k = k contribute:
        for S k = -k the cos and sin lines cancel, otherwise B* moves the
        line off itself.  The sum runs over that sublattice, counting +-k
        separately.
        """
        bd = self.boundary
        n = bd.n
        total = 0.0
        full = b_star_harmonic(bd, B, q)
        for cols, par in ((self.split.minus(q), MINUS), (self.split.plus(q), PLUS)):
            if parity in (None, par) and cols.size:
                total += float(np.einsum("ij,ik,kj->", cols, full, cols))
        if n == 0:
            return total
        fixed = sum(1 for c in range(bd.n_components) if B.perm[c] == c)
        if not fixed:
            return total
        kmax = int(math.floor(bd.scale * math.sqrt(self.cutoff)))
        free = [a for a in range(n) if B.signs[a] == 1]
        if not free:
            return total
        rng = np.arange(-kmax, kmax + 1)
        grids = np.meshgrid(*([rng] * len(free)), indexing="ij")
        k = np.zeros((grids[0].size, n), int)
        for j, a in enumerate(free):
            k[:, a] = grids[j].ravel()
        norm2 = np.sum(k * k, axis=1)
        k = k[(norm2 > 0) & (norm2 <= kmax * kmax)]
        eig = np.sum(k * k, axis=1) / bd.scale ** 2
        w = np.exp(-t * eig) * np.cos(k @ np.array(B.shift, float))
        lam_q = exterior_power(np.diag(np.array(B.signs, float)), q)
        for vec, par in self._coefficient_vectors(q, k):
            if parity in (None, par):
                vv = np.einsum("ji,ik,jk->j", vec, lam_q, vec)
                total += fixed * float(np.sum(w * vv))
        return total

    def tail_bound(self, q: int, t: float) -> float:
        """Bound on sum over discarded lines of e^{-t lambda} (times max |coefficient| 1)."""
        bd = self.boundary
        if bd.n == 0:
            return 0.0
        kmax = math.floor(bd.scale * math.sqrt(self.cutoff))
        a = math.sqrt(t) / bd.scale
        # sum_{k > K} e^{-a^2 k^2} <= integral from K of e^{-a^2 x^2}
        one = math.sqrt(math.pi) / (2 * a) * erfc(a * kmax)
        if bd.n == 1:
            per_comp = 2 * one  # cos and sin
        else:
            # at most 8 (r + 1) lattice points have r <= |k| < r + 1
            k0 = max(kmax - 1, 0)
            per_comp = 8 * (math.exp(-(a * k0) ** 2) / (2 * a * a)
                            + math.sqrt(math.pi) / a * erfc(a * k0))
        return per_comp * bd.n_components * math.comb(bd.n, q)


def default_cutoff(t_min: float) -> float:
    """Eigenvalue cutoff 50 / t_min: e^{-t lambda} < e^{-50} beyond it."""
    return 50.0 / t_min


def spectral_basis(boundary: BoundaryManifold, cutoff: float, split: KSplit) -> SpectralBasis:
    basis = SpectralBasis(boundary, split, cutoff)
    for q in range(boundary.n + 1):
        n_harm = split.minus(q).shape[1] + split.plus(q).shape[1]
        if n_harm != len(harmonic_labels(boundary, q)):
            raise SpectralError("K and star K do not span the harmonic forms")
    return basis


_RESTRICT = {"all": None, "minus": MINUS, "plus": PLUS}


def equivariant_heat_trace(basis: SpectralBasis, B: BoundaryIsometry, q: int, restriction: str,
                           t: float, tail_tol: float = TAIL_TOL) -> float:
    """Tr(B* e^{-t Delta_Y^q}) on all q-forms, or on the minus / plus part."""
    if t <= 0:
        raise SpectralError("t must be positive")
    if restriction not in _RESTRICT:
        raise SpectralError(f"unknown restriction {restriction!r}")
    if q < 0 or q > basis.boundary.n:
        return 0.0
    tail = basis.tail_bound(q, t)
    if tail > tail_tol:
        raise SpectralError(f"t = {t:g} too small for cutoff {basis.cutoff:g} (tail bound {tail:.1e})")
    return basis.fixed_sublattice_trace(B, q, _RESTRICT[restriction], t)


def equivariant_heat_trace_lines(basis: SpectralBasis, B: BoundaryIsometry, q: int, restriction: str,
                                 t: float) -> float:
    """The same trace summed over every stored line (slow reference)."""
    d = basis.degrees[q]
    vals = np.exp(-t * d.eig) * basis.b_diagonal(B, q)
    par = _RESTRICT[restriction]
    if par is not None:
        vals = vals[d.parity == par]
    return float(np.sum(vals))


def lefschetz_number_of(basis: SpectralBasis, B: BoundaryIsometry, t: float) -> float:
    """Sum_q (-1)^q Tr(B* e^{-t Delta_Y^q})."""
    return sum((-1) ** q * equivariant_heat_trace(basis, B, q, "all", t)
               for q in range(basis.boundary.n + 1))
