"""Closed-form differential forms in chart coordinates and parametrized
chains to integrate them over."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

Index = Tuple[int, ...]


def bump_1d(t, center: float, width: float, order: int = 6):
    """Normalized polynomial bump (1 - s^2)^order, unit integral, support |t-center|<width."""
    norm = 2.0 ** (2 * order + 1) * math.factorial(order) ** 2 / math.factorial(2 * order + 1)
    s = (np.asarray(t, float) - center) / width
    return np.where(np.abs(s) < 1, (1 - s * s) ** order, 0.0) / (norm * width)


@dataclass
class Form:
    """k-form on an m-dimensional chart.

    ``terms`` maps a sorted coordinate index tuple I to a coefficient
    function of the points array (N, m) returning (N,).
    """

    degree: int
    dim: int
    terms: Dict[Index, Callable[[np.ndarray], np.ndarray]]
    name: str = ""
    support: Optional[Tuple[np.ndarray, np.ndarray]] = None  # chart box containing the support

    def evaluate(self, points: np.ndarray, vectors: np.ndarray) -> np.ndarray:
        """omega_p(v_1, ..., v_k) for points (N, m) and vectors (N, m, k)."""
        points = np.atleast_2d(points)
        out = np.zeros(points.shape[0])
        for idx, fn in self.terms.items():
            coeff = fn(points)
            if self.degree == 0:
                out = out + coeff
            else:
                minor = vectors[:, list(idx), :]
                out = out + coeff * (np.linalg.det(minor) if self.degree > 1 else minor[:, 0, 0])
        return out


def constant_function(dim: int) -> Form:
    return Form(0, dim, {(): lambda p: np.ones(p.shape[0])}, name="1")


def angle_form(dim: int, axis: int, name: str) -> Form:
    return Form(1, dim, {(axis,): lambda p: np.full(p.shape[0], 1.0 / (2 * math.pi))}, name=name)


def bump_form(dim: int, centers: Sequence[float], widths: Sequence[float],
              axes: Sequence[int], name: str) -> Form:
    """Product bump in the given chart axes, times d(axes)."""
    centers = list(centers)
    widths = list(widths)
    axes = list(axes)

    def coeff(p):
        out = np.ones(p.shape[0])
        for a, c, w in zip(axes, centers, widths):
            out = out * bump_1d(p[:, a], c, w)
        return out

    lo = np.full(dim, -np.inf)
    hi = np.full(dim, np.inf)
    for a, c, w in zip(axes, centers, widths):
        lo[a], hi[a] = c - w, c + w
    return Form(len(axes), dim, {tuple(axes): coeff}, name=name, support=(lo, hi))


def _gauss(n: int, a: float, b: float, panels: int = 1):
    x, w = np.polynomial.legendre.leggauss(n)
    edges = np.linspace(a, b, panels + 1)
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        xs.append(0.5 * (hi - lo) * x + 0.5 * (hi + lo))
        ws.append(0.5 * (hi - lo) * w)
    return np.concatenate(xs), np.concatenate(ws)


def _periodic(n: int, a: float, b: float):
    x = a + (b - a) * np.arange(n) / n
    return x, np.full(n, (b - a) / n)


@dataclass
class Chain:
    """Parametrized k-chain: a map from a parameter box to chart points.

    ``param`` maps (N, k) parameters to (points (N, m), tangents (N, m, k)).
    ``periodic`` flags parameter directions that close up (trapezoid rule).
    """

    dim: int
    k: int
    bounds: List[Tuple[float, float]]
    param: Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]]
    periodic: List[bool] = field(default_factory=list)
    name: str = ""
    fundamental: bool = False

    def nodes(self, n: int = 64, panels: int = 8):
        if self.k == 0:
            return np.zeros((1, 0)), np.ones(1)
        per = self.periodic or [False] * self.k
        rules = []
        for (a, b), p in zip(self.bounds, per):
            rules.append(_periodic(n * panels, a, b) if p else _gauss(n, a, b, panels))
        grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
        wgrids = np.meshgrid(*[r[1] for r in rules], indexing="ij")
        s = np.stack([g.ravel() for g in grids], axis=1)
        w = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
        return s, w


def integrate(form: Form, chain: Chain, pullback=None, n: int = 24, panels: int = 8,
              batch: int = 200000) -> float:
    """Integral of ``form`` (or of ``pullback* form``) over ``chain``.

    ``pullback`` is an object with ``__call__(points)`` and
    ``jacobian(points)`` acting on chart points.
    """
    if form.degree != chain.k:
        raise ValueError("form degree and chain dimension differ")
    s, w = chain.nodes(n, panels)
    total = 0.0
    for start in range(0, s.shape[0], batch):
        ss, ww = s[start:start + batch], w[start:start + batch]
        pts, tan = chain.param(ss)
        if pullback is not None:
            jac = pullback.jacobian(pts)
            pts = pullback(pts)
            tan = np.einsum("nij,njk->nik", jac, tan) if chain.k else tan
        total += float(np.dot(form.evaluate(pts, tan), ww))
    return total


def exterior_power(a: np.ndarray, q: int) -> np.ndarray:
    """Matrix of Lambda^q(a) in the basis of sorted index tuples."""
    a = np.asarray(a)
    m = a.shape[-1]
    idx = list(combinations(range(m), q))
    if q == 0:
        return np.ones(a.shape[:-2] + (1, 1))
    out = np.empty(a.shape[:-2] + (len(idx), len(idx)), dtype=a.dtype)
    for i, I in enumerate(idx):
        for j, J in enumerate(idx):
            sub = a[..., list(I), :][..., list(J)]
            out[..., i, j] = np.linalg.det(sub) if q > 1 else sub[..., 0, 0]
    return out
