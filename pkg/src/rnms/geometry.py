"""Geometric realisation, windows and model sets in the cut and project scheme.

A letter ``a`` is an interval of length lambda_m and ``b`` one of length 1;
points are left endpoints.  Every point is kept exactly as ``c + d*lambda``
via integer coefficient arrays, so window membership is decided with exact
arithmetic, including the half-open endpoints of the singular windows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import QuadInt, discriminant, lambda_conjugate, lambda_value
from .words import TwoSidedPatch, to_array

__all__ = [
    "PointSet",
    "Window",
    "WindowReport",
    "realize",
    "star_project",
    "superwindow",
    "deterministic_window",
    "window_check",
    "superwindow_conditions",
    "superwindow_conditions_check",
    "paper_superwindow_parts",
    "model_set",
    "meyer_witness",
    "covering_radius",
]

# int64 coefficient bound for the vectorised exact sign (squares must not overflow)
_EXACT_BOUND = 2**29


@dataclass(frozen=True)
class PointSet:
    """Sorted points ``a + b*lambda_m`` stored as integer coefficient arrays."""

    a: np.ndarray
    b: np.ndarray
    m: int

    def __post_init__(self):
        if self.a.shape != self.b.shape:
            raise ValueError("coefficient arrays must have the same shape")

    def __len__(self):
        return len(self.a)

    def __iter__(self):
        for a, b in zip(self.a.tolist(), self.b.tolist()):
            yield QuadInt(a, b, self.m)

    def __getitem__(self, i) -> QuadInt:
        return QuadInt(int(self.a[i]), int(self.b[i]), self.m)

    @property
    def points(self) -> list[QuadInt]:
        return list(self)

    @property
    def values(self) -> np.ndarray:
        return self.a + self.b * lambda_value(self.m)

    @property
    def star_values(self) -> np.ndarray:
        return self.a + self.b * lambda_conjugate(self.m)

    @classmethod
    def from_points(cls, points, m: int) -> PointSet:
        pts = sorted(points)
        return cls(np.array([p.a for p in pts], dtype=np.int64), np.array([p.b for p in pts], dtype=np.int64), m)


@dataclass(frozen=True)
class Window:
    """Interval in internal space.

    Endpoints are either QuadInt (then the window is ``[lo/denom, hi/denom]``
    and membership is exact) or plain floats.
    """

    lo: QuadInt | float
    hi: QuadInt | float
    lo_closed: bool = True
    hi_closed: bool = True
    denom: int = 1

    def __post_init__(self):
        if self.denom < 1:
            raise ValueError("denom must be a positive integer")
        if not self.lo_value < self.hi_value:
            raise ValueError(f"empty window [{self.lo_value}, {self.hi_value}]")

    @property
    def exact(self) -> bool:
        return isinstance(self.lo, QuadInt) and isinstance(self.hi, QuadInt)

    @property
    def lo_value(self) -> float:
        return float(self.lo) / self.denom

    @property
    def hi_value(self) -> float:
        return float(self.hi) / self.denom

    @property
    def volume(self) -> float:
        return self.hi_value - self.lo_value

    def contains(self, y) -> bool:
        """Membership of a single internal-space value (QuadInt exact, float otherwise)."""
        if isinstance(y, QuadInt) and self.exact:
            mask = _exact_inside(np.array([y.a]), np.array([y.b]), self, y.m)
            return bool(mask[0])
        y = float(y)
        lo_ok = y >= self.lo_value if self.lo_closed else y > self.lo_value
        hi_ok = y <= self.hi_value if self.hi_closed else y < self.hi_value
        return lo_ok and hi_ok

    def __str__(self):
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{self.lo_value:.12g}, {self.hi_value:.12g}{right}"


@dataclass
class WindowReport:
    all_inside: bool
    max_violation: float
    n_outside: int
    n_points: int


def _coeff_array(xs) -> np.ndarray:
    return np.asarray(xs, dtype=np.int64)


def realize(patch: TwoSidedPatch | str, m: int, anchor: QuadInt | None = None) -> PointSet:
    """Left endpoints of the tiles of a word or a two-sided patch.

    For a two-sided patch the marker sits at the origin (``anchor`` is then
    ignored): the right word starts at 0 and the left word ends at 0.
    """
    if isinstance(patch, TwoSidedPatch):
        right = to_array(patch.right).astype(np.int64)
        left = to_array(patch.left).astype(np.int64)
        # right side: prefix counts before each tile
        rb = np.cumsum(right) - right
        ra = np.arange(len(right)) - rb
        # left side, walking away from the marker: inclusive counts
        rev = left[::-1]
        lb = np.cumsum(rev)
        la = np.arange(1, len(rev) + 1) - lb
        a = np.concatenate([-lb[::-1], rb])
        b = np.concatenate([-la[::-1], ra])
        return PointSet(a, b, m)
    if not patch:
        raise ValueError("cannot realise the empty word")
    anchor = anchor if anchor is not None else QuadInt(0, 0, m)
    letters = to_array(patch).astype(np.int64)
    nb = np.cumsum(letters) - letters
    na = np.arange(len(letters)) - nb
    return PointSet(nb + anchor.a, na + anchor.b, m)


def star_project(ps: PointSet) -> np.ndarray:
    return ps.star_values


def superwindow(m: int) -> Window:
    """[lambda' - 1, 1 - lambda'], the window containing every generating random set."""
    lamc = QuadInt.lam_conjugate(m)
    return Window(lamc - 1, 1 - lamc)


def deterministic_window(m: int, i: int, seed: str | None = None) -> Window:
    """Window of the noble means set for branch ``i``.

    Generic branches 0 < i < m get ``i*tau + [lambda', 1]`` with
    ``tau = -(lambda' + 1)/m``.  The singular branches need the two-letter seed
    across the marker: ``"aa"`` or ``"ab"`` for i = 0 and ``"aa"`` or ``"ba"``
    for i = m.
    """
    if not 0 <= i <= m:
        raise ValueError(f"branch index {i} out of range 0..{m}")
    lamc = QuadInt.lam_conjugate(m)
    seed = seed.replace("|", "") if seed else seed
    if i == 0:
        if seed == "aa":
            return Window(lamc, QuadInt(1, 0, m), hi_closed=False)
        if seed == "ab":
            return Window(lamc, QuadInt(1, 0, m), lo_closed=False)
        raise ValueError(f"seed {seed!r} is not legal for branch 0 (use 'aa' or 'ab')")
    if i == m:
        if seed == "aa":
            return Window(QuadInt(-1, 0, m), -lamc, lo_closed=False)
        if seed == "ba":
            return Window(QuadInt(-1, 0, m), -lamc, hi_closed=False)
        raise ValueError(f"seed {seed!r} is not legal for branch m (use 'aa' or 'ba')")
    # m * (i tau + y) = m y - i (lambda' + 1)
    shift = -(lamc + 1) * i
    return Window(lamc * m + shift, QuadInt(m, 0, m) + shift, denom=m)


def _exact_sign_arrays(c: np.ndarray, d: np.ndarray, m: int) -> np.ndarray:
    """Exact sign of c + d*lambda elementwise."""
    u = 2 * c + d * m
    v = d
    if max(np.abs(u).max(initial=0), np.abs(v).max(initial=0)) > _EXACT_BOUND:
        # fall back to Python integers
        from .algebra import sign_of

        return np.array([sign_of(int(x), int(y), m) for x, y in zip(c.tolist(), d.tolist())], dtype=np.int64)
    dd = discriminant(m)
    uu = u * u
    vv = v * v * dd
    sign = np.where((u >= 0) & (v >= 0), np.where((u > 0) | (v > 0), 1, 0), 0)
    sign = np.where((u <= 0) & (v <= 0) & ((u < 0) | (v < 0)), -1, sign)
    mixed_pos = (u > 0) & (v < 0)
    mixed_neg = (u < 0) & (v > 0)
    sign = np.where(mixed_pos, np.where(uu > vv, 1, -1), sign)
    sign = np.where(mixed_neg, np.where(vv > uu, 1, -1), sign)
    return sign


def _exact_inside(sa: np.ndarray, sb: np.ndarray, w: Window, m: int) -> np.ndarray:
    """Membership of internal values ``sa + sb*lambda`` in an exact window."""
    lo_sign = _exact_sign_arrays(w.denom * sa - w.lo.a, w.denom * sb - w.lo.b, m)
    hi_sign = _exact_sign_arrays(w.hi.a - w.denom * sa, w.hi.b - w.denom * sb, m)
    lo_ok = lo_sign >= 0 if w.lo_closed else lo_sign > 0
    hi_ok = hi_sign >= 0 if w.hi_closed else hi_sign > 0
    return lo_ok & hi_ok


def _star_coefficients(ps: PointSet) -> tuple[np.ndarray, np.ndarray]:
    # a + b lambda' = (a + b m) - b lambda
    return ps.a + ps.b * ps.m, -ps.b


def window_check(ps: PointSet, w: Window) -> WindowReport:
    """Check that every star image lies in ``w``, honouring the closure flags."""
    s = ps.star_values
    if w.exact:
        sa, sb = _star_coefficients(ps)
        inside = _exact_inside(sa, sb, w, ps.m)
    else:
        lo_ok = s >= w.lo_value if w.lo_closed else s > w.lo_value
        hi_ok = s <= w.hi_value if w.hi_closed else s < w.hi_value
        inside = lo_ok & hi_ok
    excess = np.maximum(w.lo_value - s, s - w.hi_value)
    max_violation = float(max(0.0, excess.max(initial=0.0))) if len(s) else 0.0
    n_out = int((~inside).sum())
    return WindowReport(all_inside=n_out == 0, max_violation=max_violation, n_outside=n_out, n_points=len(s))


def paper_superwindow_parts(m: int) -> tuple[Window, Window]:
    """The intervals A = [-1, 1 - lambda'] (a-tiles) and B = [lambda' - 1, -lambda'] (b-tiles)."""
    lamc = QuadInt.lam_conjugate(m)
    return Window(QuadInt(-1, 0, m), 1 - lamc), Window(lamc - 1, -lamc)


def _sign(x) -> int:
    if isinstance(x, QuadInt):
        return x.sign()
    if abs(x) <= 1e-12:
        return 0
    return 1 if x > 0 else -1


def superwindow_conditions(A: Window, B: Window, m: int) -> dict[str, bool]:
    """The six non-redundant invariance inequalities plus the minimality equation.

    With A = [alpha, beta], B = [gamma, delta] and l = lambda':
    (1) l(beta + m - 1) >= alpha, (2) l delta >= alpha, (3) l gamma <= beta,
    (4) l(beta + m) >= gamma, (5) l alpha + 1 <= beta, (6) l alpha <= delta,
    minimality: l(beta + m) = gamma.  Exact when all endpoints are QuadInt
    with unit denominator; otherwise floats with 1e-12 slack.
    """
    exact = A.exact and B.exact and A.denom == 1 and B.denom == 1
    if exact:
        lamc = QuadInt.lam_conjugate(m)
        alpha, beta, gamma, delta = A.lo, A.hi, B.lo, B.hi
    else:
        lamc = lambda_conjugate(m)
        alpha, beta, gamma, delta = A.lo_value, A.hi_value, B.lo_value, B.hi_value
    return {
        "1": _sign(lamc * (beta + (m - 1)) - alpha) >= 0,
        "2": _sign(lamc * delta - alpha) >= 0,
        "3": _sign(beta - lamc * gamma) >= 0,
        "4": _sign(lamc * (beta + m) - gamma) >= 0,
        "5": _sign(beta - (lamc * alpha + 1)) >= 0,
        "6": _sign(delta - lamc * alpha) >= 0,
        "minimal": _sign(lamc * (beta + m) - gamma) == 0,
    }


def superwindow_conditions_check(A: Window, B: Window, m: int) -> bool:
    return all(superwindow_conditions(A, B, m).values())


def model_set(m: int, w: Window, radius: float) -> PointSet:
    """All x in Z[lambda_m] with |x| <= radius and star(x) in ``w``, sorted."""
    lam, lamc = lambda_value(m), lambda_conjugate(m)
    sqrt_d = math.sqrt(discriminant(m))
    lo, hi = w.lo_value, w.hi_value
    # x - x* = b sqrt(D)
    b = np.arange(math.floor((-radius - hi) / sqrt_d) - 1, math.ceil((radius - lo) / sqrt_d) + 2, dtype=np.int64)
    a_min = np.floor(lo - b * lamc).astype(np.int64) - 1
    span = int(math.ceil(hi - lo)) + 3
    aa = (a_min[:, None] + np.arange(span)[None, :]).ravel()
    bb = np.repeat(b, span)
    if w.exact:
        inside = _exact_inside(aa + bb * m, -bb, w, m)
    else:
        s = aa + bb * lamc
        inside = (s >= lo if w.lo_closed else s > lo) & (s <= hi if w.hi_closed else s < hi)
    x = aa + bb * lam
    keep = inside & (np.abs(x) <= radius)
    aa, bb, x = aa[keep], bb[keep], x[keep]
    order = np.argsort(x, kind="stable")
    return PointSet(aa[order], bb[order], m)


def _gaps(ps: PointSet) -> np.ndarray:
    """Consecutive differences, evaluated from exact integer differences."""
    da = np.diff(ps.a)
    db = np.diff(ps.b)
    return da + db * lambda_value(ps.m)


def meyer_witness(ps: PointSet) -> float:
    """Smallest positive distance between points of the patch."""
    if len(ps) < 2:
        raise ValueError("need at least two points")
    # in a sorted set the minimum of Lambda - Lambda over positives is a consecutive gap
    return float(_gaps(ps).min())


def covering_radius(ps: PointSet) -> float:
    """Half the largest gap inside the patch."""
    if len(ps) < 2:
        raise ValueError("need at least two points")
    return float(_gaps(ps).max()) / 2
