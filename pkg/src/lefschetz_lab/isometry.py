"""Isometries of flat boundaries and their descriptor grammar.

A boundary is a disjoint union of flat tori T^n (n = 0, 1, 2) in angle
coordinates y in [0, 2pi)^n.  An isometry permutes components and acts on
each one by ``y -> A y + b`` with ``A`` a diagonal sign matrix.

Descriptor grammar (tokens joined by ``+``)::

    id                identity
    swap              exchange the two boundary components
    rot=<angle>       rotation of the theta circle
    refl[=<axis>]     reflection of the theta circle across an axis angle
    phi-rot=<angle>   rotation of the phi circle (solid torus)
    phi-refl[=<axis>] reflection of the phi circle (solid torus)

Angles accept arithmetic with ``pi``, e.g. ``pi/4`` or ``2*pi/3``.
"""

from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass
from typing import Tuple

import numpy as np

TWO_PI = 2.0 * math.pi

_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
        ast.Div: operator.truediv, ast.USub: operator.neg, ast.UAdd: operator.pos}


def parse_angle(text: str) -> float:
    """Evaluate a numeric expression that may contain ``pi``."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        raise ValueError(f"bad angle expression: {text!r}")

    try:
        return ev(ast.parse(text.strip().replace("π", "pi"), mode="eval"))
    except SyntaxError as exc:
        raise ValueError(f"bad angle expression: {text!r}") from exc


def wrap(x):
    """Wrap angles to [-pi, pi)."""
    return (np.asarray(x) + math.pi) % TWO_PI - math.pi


@dataclass(frozen=True)
class BoundaryIsometry:
    """``(c, y) -> (perm[c], A y + b)`` with ``A = diag(signs)``."""

    perm: Tuple[int, ...]
    signs: Tuple[int, ...]
    shift: Tuple[float, ...]
    descriptor: str = ""

    @property
    def n(self) -> int:
        return len(self.signs)

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(np.array(self.signs, dtype=float)).reshape(self.n, self.n)

    @property
    def swaps(self) -> bool:
        return any(p != i for i, p in enumerate(self.perm))

    def apply(self, comp, y):
        comp = np.asarray(comp)
        y = np.asarray(y, dtype=float)
        out = y * np.array(self.signs, dtype=float) + np.array(self.shift, dtype=float)
        return np.asarray(self.perm)[comp], np.mod(out, TWO_PI)

    def fixed_points(self):
        """Fixed points as (component, angles); raises if not isolated."""
        pts = []
        for comp, target in enumerate(self.perm):
            if target != comp:
                continue
            per_axis = []
            for s, b in zip(self.signs, self.shift):
                if s == 1:
                    if abs(wrap(b)) < 1e-12:
                        raise ValueError("boundary isometry fixes a whole circle")
                    per_axis.append([])
                else:
                    a = (b / 2.0) % TWO_PI
                    per_axis.append([a, (a + math.pi) % TWO_PI])
            if any(len(ax) == 0 for ax in per_axis):
                continue
            grids = np.meshgrid(*per_axis, indexing="ij") if per_axis else []
            flat = [g.ravel() for g in grids]
            count = flat[0].size if flat else 1
            for k in range(count):
                pts.append((comp, tuple(float(f[k]) for f in flat)))
        return pts

    def distance_check(self, n_samples: int = 200, seed: int = 0) -> float:
        """Largest |d(By, By') - d(y, y')| over random pairs (same component)."""
        rng = np.random.default_rng(seed)
        ncomp = len(self.perm)
        worst = 0.0
        for _ in range(n_samples):
            c = int(rng.integers(ncomp))
            y1 = rng.uniform(0, TWO_PI, self.n)
            y2 = rng.uniform(0, TWO_PI, self.n)
            c1, b1 = self.apply(c, y1)
            c2, b2 = self.apply(c, y2)
            d0 = np.linalg.norm(wrap(y1 - y2))
            d1 = np.linalg.norm(wrap(b1 - b2)) if c1 == c2 else np.inf
            worst = max(worst, abs(d1 - d0))
        return worst


def parse_isometry(descriptor: str, n: int, n_components: int) -> BoundaryIsometry:
    """Build an isometry of ``n_components`` flat n-tori from a descriptor."""
    signs = [1] * n
    shift = [0.0] * n
    perm = list(range(n_components))
    seen = set()
    for raw in descriptor.replace(" ", "").split("+"):
        if not raw:
            raise ValueError(f"empty token in isometry descriptor {descriptor!r}")
        key, _, arg = raw.partition("=")
        if key in seen:
            raise ValueError(f"repeated token {key!r} in {descriptor!r}")
        seen.add(key)
        if key == "id":
            continue
        if key == "swap":
            if n_components != 2:
                raise ValueError("swap needs exactly two boundary components")
            perm = [1, 0]
            continue
        axis = {"rot": 0, "refl": 0, "phi-rot": 1, "phi-refl": 1}.get(key)
        if axis is None:
            raise ValueError(f"unknown isometry token {key!r}")
        if axis >= n:
            raise ValueError(f"token {key!r} needs a boundary of dimension > {axis}")
        if key.endswith("rot"):
            if not arg:
                raise ValueError(f"{key} needs an angle")
            shift[axis] = parse_angle(arg) % TWO_PI
        else:
            signs[axis] = -1
            shift[axis] = (2.0 * parse_angle(arg) if arg else 0.0) % TWO_PI
        if {"rot", "refl"} <= seen or {"phi-rot", "phi-refl"} <= seen:
            raise ValueError(f"rotation and reflection of the same circle in {descriptor!r}")
    return BoundaryIsometry(tuple(perm), tuple(signs), tuple(shift), descriptor)
