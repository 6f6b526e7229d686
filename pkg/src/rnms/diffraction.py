"""Diffraction of noble means sets.

Deterministic model sets have pure point spectrum with closed-form
amplitudes.  For the random Fibonacci case (m = 1) the mean and variance of
the exponential sums X_n(k) obey linear recursions; the variance part gives
the density phi of the absolutely continuous component and |E_n|^2 / L_n^2 the
pure point intensities.

All phases exp(-2 pi i k L_n) go through ``frac_turns`` so they stay accurate
for large n.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .algebra import FourierModulePoint, QuadInt, discriminant, frac_turns, lambda_conjugate, lambda_power, lambda_value
from .geometry import Window, deterministic_window
from .words import ProbVector, word_length

__all__ = [
    "MomentState",
    "SpectrumSample",
    "MonteCarloResult",
    "RootSet",
    "PhasePrecisionError",
    "density_det",
    "window_amplitude",
    "amplitude_det",
    "phases",
    "moment_recursion",
    "psi",
    "psi_quadratic",
    "psi_product",
    "psi_series",
    "phi",
    "phi_partial",
    "phi_truncation_order",
    "ac_bound",
    "pp_intensity",
    "f_j",
    "root_set_fj",
    "monte_carlo_moments",
    "spectrum_scan",
]

PSI_AGREEMENT = 1e-10


class PhasePrecisionError(ArithmeticError):
    """The two independent evaluations of Psi_n disagree."""


@dataclass(frozen=True)
class MomentState:
    n: int
    E_n: complex
    V_n: float
    k: float
    L_n: float


@dataclass(frozen=True)
class SpectrumSample:
    k: float
    pp: float
    ac: float


@dataclass(frozen=True)
class MonteCarloResult:
    mean: complex
    var: float
    stderr: float
    var_stderr: float
    second_moment: float
    samples: int


def _sinc(x: float) -> float:
    return 1.0 if x == 0 else math.sin(x) / x


def density_det(m: int) -> float:
    """Point density (1 - lambda') / sqrt(m^2 + 4) of a deterministic noble means set."""
    return (1 - lambda_conjugate(m)) / math.sqrt(discriminant(m))


def _star_frequency(k) -> float:
    if isinstance(k, FourierModulePoint):
        return k.star_value()
    raise TypeError("amplitudes are defined on the Fourier module; pass a FourierModulePoint")


def window_amplitude(k: FourierModulePoint, w: Window, m: int) -> complex:
    """Amplitude of the model set with window ``w`` at ``k``.

    (1/sqrt D) * integral over w of exp(-2 pi i k* y) dy; endpoint closure
    does not matter.
    """
    ks = _star_frequency(k)
    vol = w.volume
    center = (w.lo_value + w.hi_value) / 2
    return vol / math.sqrt(discriminant(m)) * complex(np.exp(-2j * math.pi * ks * center)) * _sinc(math.pi * ks * vol)


def amplitude_det(m: int, i: int, k: FourierModulePoint, seed: str | None = None) -> complex:
    """Bragg amplitude A_{m,i}(k) of the deterministic set for branch ``i``.

    Generic branches use dens * exp(-pi i k* (lambda'+1)(1 - 2i/m)) sinc(pi k* (1 - lambda'));
    the singular branches i = 0, m use the window transform of their seed window
    (default seed "aa").
    """
    if not 0 <= i <= m:
        raise ValueError(f"branch index {i} out of range 0..{m}")
    if isinstance(k, FourierModulePoint) and k.m != m:
        raise ValueError(f"mismatched family parameter: m={k.m} vs m={m}")
    if i in (0, m):
        return window_amplitude(k, deterministic_window(m, i, seed or "aa"), m)
    ks = _star_frequency(k)
    lamc = lambda_conjugate(m)
    phase = complex(np.exp(-1j * math.pi * ks * (lamc + 1) * (1 - 2 * i / m)))
    return density_det(m) * phase * _sinc(math.pi * ks * (1 - lamc))


@lru_cache(maxsize=256)
def _lambda_powers(m: int, n_max: int) -> tuple[QuadInt, ...]:
    return tuple(lambda_power(m, n) for n in range(n_max + 1))


def phases(k, n_max: int, m: int = 1) -> np.ndarray:
    """e_n = exp(-2 pi i k lambda^n) for n = 0..n_max, each reduced mod 1 exactly."""
    turns = np.array([frac_turns(k, x) for x in _lambda_powers(m, n_max)])
    return np.exp(-2j * np.pi * turns)


def _check_p(p) -> tuple[float, float]:
    pv = ProbVector.coerce(p, 1)
    return float(pv[0]), float(pv[1])


def _means(e: np.ndarray, p0: float, p1: float) -> np.ndarray:
    n_max = len(e) - 1
    E = np.empty(n_max + 1, dtype=complex)
    E[0] = e[0]
    if n_max >= 1:
        E[1] = e[1]
    for n in range(2, n_max + 1):
        E[n] = (p1 + p0 * e[n - 2]) * E[n - 1] + (p0 + p1 * e[n - 1]) * E[n - 2]
    return E


def _psi_quad(e: np.ndarray, E: np.ndarray, n: int) -> float:
    return 0.5 * abs((1 - e[n - 2]) * E[n - 1] - (1 - e[n - 1]) * E[n - 2]) ** 2


def _psi_prod_series(e: np.ndarray, p0: float, p1: float, n_max: int) -> np.ndarray:
    """Psi_2..Psi_{n_max} (indexed by n) from the product form."""
    out = np.zeros(n_max + 1)
    if n_max < 2:
        return out
    out[2] = 0.5 * abs(e[1] - e[0]) ** 2
    for n in range(3, n_max + 1):
        out[n] = out[n - 1] * abs(p0 + p1 * e[n - 2]) ** 2
    return out


def moment_recursion(k, n_max: int, p=(0.5, 0.5)) -> list[MomentState]:
    """Mean E_n and variance V_n of X_n(k) for n = 0..n_max (m = 1)."""
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    p0, p1 = _check_p(p)
    e = phases(k, n_max)
    E = _means(e, p0, p1)
    V = np.zeros(n_max + 1)
    for n in range(2, n_max + 1):
        V[n] = V[n - 1] + V[n - 2] + 2 * p0 * p1 * _psi_quad(e, E, n)
    lam = lambda_value(1)
    kf = float(k)
    return [MomentState(n=n, E_n=complex(E[n]), V_n=float(V[n]), k=kf, L_n=lam**n) for n in range(n_max + 1)]


def psi_quadratic(k, n: int, p=(0.5, 0.5)) -> float:
    """Psi_n from the squared-modulus form in the means E_{n-1}, E_{n-2}."""
    if n < 2:
        raise ValueError("n must be >= 2")
    p0, p1 = _check_p(p)
    e = phases(k, n)
    return _psi_quad(e, _means(e, p0, p1), n)


def psi_product(k, n: int, p=(0.5, 0.5)) -> float:
    """Psi_n = |e_1 - e_0|^2 / 2 * prod_{j=1}^{n-2} |p0 + p1 e_j|^2."""
    if n < 2:
        raise ValueError("n must be >= 2")
    p0, p1 = _check_p(p)
    return float(_psi_prod_series(phases(k, n), p0, p1, n)[n])


def psi_series(k, n_max: int, p=(0.5, 0.5)) -> np.ndarray:
    """Psi_2(k), ..., Psi_{n_max}(k) from the product form (entry j is Psi_{j+2})."""
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    p0, p1 = _check_p(p)
    return _psi_prod_series(phases(k, n_max), p0, p1, n_max)[2:]


def psi(k, n: int, p=(0.5, 0.5), tol: float = PSI_AGREEMENT) -> float:
    """Psi_n(k), evaluated two ways; raises PhasePrecisionError if they differ by more than ``tol``."""
    if n < 2:
        raise ValueError("n must be >= 2")
    p0, p1 = _check_p(p)
    e = phases(k, n)
    quad = _psi_quad(e, _means(e, p0, p1), n)
    prod = float(_psi_prod_series(e, p0, p1, n)[n])
    if abs(quad - prod) > tol:
        raise PhasePrecisionError(f"Psi_{n}({float(k)!r}): quadratic {quad!r} vs product {prod!r}")
    return prod


def phi_truncation_order(p, tol: float) -> int:
    """Smallest N >= 2 with 4 p0 p1 lambda^(1-N) / (sqrt 5 (1 - 1/lambda)) <= tol."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    p0, p1 = _check_p(p)
    lam = lambda_value(1)
    c = 4 * p0 * p1 / (math.sqrt(5) * (1 - 1 / lam))
    if c <= tol:
        return 2
    return max(2, math.ceil(1 + math.log(c / tol) / math.log(lam)))


def phi(k, p=(0.5, 0.5), tol: float = 1e-12) -> float:
    """Density of the absolutely continuous part, (2 p0 p1 lambda / sqrt 5) sum_{i>=2} lambda^-i Psi_i(k)."""
    p0, p1 = _check_p(p)
    if p0 * p1 == 0:
        return 0.0
    n = phi_truncation_order(p, tol)
    lam = lambda_value(1)
    series = _psi_prod_series(phases(k, n), p0, p1, n)
    weights = lam ** -np.arange(n + 1, dtype=float)
    return 2 * p0 * p1 * lam / math.sqrt(5) * math.fsum(weights[2:] * series[2:])


def phi_partial(k, n: int, p=(0.5, 0.5)) -> float:
    """phi_n(k) = V_n / L_n written as (2 p0 p1 / L_n) sum_{i=2}^n l_{1,n+1-i} Psi_i(k)."""
    if n < 2:
        raise ValueError("n must be >= 2")
    p0, p1 = _check_p(p)
    series = _psi_prod_series(phases(k, n), p0, p1, n)
    terms = [word_length(1, n + 1 - i) * series[i] for i in range(2, n + 1)]
    return 2 * p0 * p1 / lambda_value(1) ** n * math.fsum(terms)


def ac_bound(n: int) -> float:
    """Uniform bound on |phi_n - phi|:
    |(l'^(n-1) - l'^-2) / (lambda^n sqrt5 (1 - 1/l'))| + 1/(lambda^(n-2) sqrt5)."""
    lam, lamc = lambda_value(1), lambda_conjugate(1)
    s5 = math.sqrt(5)
    first = abs((lamc ** (n - 1) - lamc**-2) / (lam**n * s5 * (1 - 1 / lamc)))
    return first + 1 / (lam ** (n - 2) * s5)


def pp_intensity(k, n: int, p=(0.5, 0.5)) -> float:
    """|E_n(k)|^2 / L_n^2, the finite-n estimate of the Bragg intensity at k."""
    if n < 0:
        raise ValueError("n must be non-negative")
    p0, p1 = _check_p(p)
    E = _means(phases(k, n), p0, p1)
    return abs(E[n]) ** 2 / lambda_value(1) ** (2 * n)


def f_j(k, j: int, p=(0.5, 0.5)) -> float:
    """|p0 + p1 exp(-2 pi i k L_j)|^2."""
    p0, p1 = _check_p(p)
    t = frac_turns(k, lambda_power(1, j))
    return p0 * p0 + p1 * p1 + 2 * p0 * p1 * math.cos(2 * math.pi * t)


@dataclass(frozen=True)
class RootSet:
    """{(+-theta + 2 pi q) / (2 pi L_j) : q in Z}, or empty when ``theta`` is None."""

    j: int
    theta: float | None
    L_j: float

    @property
    def empty(self) -> bool:
        return self.theta is None

    def roots(self, k_lo: float, k_hi: float) -> list[float]:
        if self.empty:
            return []
        base = [self.theta / (2 * math.pi * self.L_j), -self.theta / (2 * math.pi * self.L_j)]
        period = 1 / self.L_j
        out = set()
        for b in base:
            q_lo = math.floor((k_lo - b) / period)
            q_hi = math.ceil((k_hi - b) / period)
            for q in range(q_lo, q_hi + 1):
                r = b + q * period
                if k_lo <= r <= k_hi:
                    out.add(round(r, 15))
        return sorted(out)

    def __str__(self):
        if self.empty:
            return f"R_{self.j} = {{}}"
        return f"R_{self.j} = {{(+-{self.theta:.12g} + 2 pi q) / (2 pi {self.L_j:.12g}) : q in Z}}"


def root_set_fj(j: int, p=(0.5, 0.5)) -> RootSet:
    """Zeros of f_j.  The arccos argument (2 p0 p1 - 1)/(2 p0 p1) reaches -1 only for p0 p1 = 1/4."""
    p0, p1 = _check_p(p)
    L_j = lambda_value(1) ** j
    q = 2 * p0 * p1
    if q == 0:
        return RootSet(j, None, L_j)
    arg = (q - 1) / q
    if arg < -1 - 1e-12:
        return RootSet(j, None, L_j)
    return RootSet(j, math.acos(max(-1.0, arg)), L_j)


def _block_offsets(m: int, n: int) -> list[list[QuadInt]]:
    """For branch i, the offsets of the m level-(n-1) blocks and the level-(n-2) block.

    Returned as offsets[i] = [offset of Y_0, ..., Y_{m-1}, offset of Z].
    """
    big, small = lambda_power(m, n - 1), lambda_power(m, n - 2)
    zero = QuadInt(0, 0, m)
    out = []
    for i in range(m + 1):
        offs = [zero + big * t for t in range(i)]
        z = zero + big * i
        offs += [z + small + big * (t - i) for t in range(i, m)]
        out.append(offs + [z])
    return out


def _sample(level: int, size: int, k, m: int, cum: np.ndarray, rng: np.random.Generator, cache: dict) -> np.ndarray:
    if level == 0:
        return np.full(size, cache["e0"])
    if level == 1:
        return np.full(size, cache["e1"])
    branch = np.minimum(np.searchsorted(cum, rng.random(size), side="right"), m)
    # every block of every sample is a fresh independent draw
    ys = [_sample(level - 1, size, k, m, cum, rng, cache) for _ in range(m)]
    z = _sample(level - 2, size, k, m, cum, rng, cache)
    table = cache.setdefault(
        ("offsets", level),
        np.exp(-2j * np.pi * np.array([[frac_turns(k, o) for o in row] for row in _block_offsets(m, level)])),
    )
    ph = table[branch]
    total = ph[:, m] * z
    for t in range(m):
        total = total + ph[:, t] * ys[t]
    return total


def monte_carlo_moments(k, n: int, p=(0.5, 0.5), samples: int = 10**5, seed: int = 0) -> MonteCarloResult:
    """Sample mean and variance of X_n(k) over independent realisations.

    X_0 = exp(-2 pi i k), X_1 = exp(-2 pi i k lambda); for branch i a level-n
    block is i level-(n-1) blocks, one level-(n-2) block and m - i level-(n-1)
    blocks, each drawn independently.  For m = 1 this is the two-case
    recursion with probabilities p0, p1.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if n < 0:
        raise ValueError("n must be non-negative")
    pv = ProbVector.coerce(p)
    m = pv.m
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed & (2**64 - 1), n, 7])))
    e = phases(k, 1, m)
    cache = {"e0": e[0], "e1": e[1]}
    x = _sample(n, samples, k, m, np.cumsum(pv.as_array()), rng, cache)
    mean = complex(x.mean())
    # shifted data keeps the deterministic case exactly zero
    d = x - x[0]
    dev = d - d.mean()
    sq = np.abs(dev) ** 2
    ddof = 1 if samples > 1 else 0
    var = float(sq.sum() / (samples - ddof)) if samples > ddof else 0.0
    var_stderr = float(np.sqrt(max(0.0, (sq**2).mean() - sq.mean() ** 2) / samples))
    return MonteCarloResult(
        mean=mean,
        var=var,
        stderr=math.sqrt(var / samples),
        var_stderr=var_stderr,
        second_moment=float((np.abs(x) ** 2).mean()),
        samples=samples,
    )


def _grid(k_lo: float, k_hi: float, step: float) -> np.ndarray:
    if step <= 0:
        raise ValueError("step must be positive")
    if k_hi < k_lo:
        raise ValueError("k_hi must be >= k_lo")
    count = math.floor((k_hi - k_lo) / step + 1e-9) + 1
    return k_lo + np.arange(count) * step


def _eval_point(args) -> SpectrumSample:
    k, n, p, tol = args
    return SpectrumSample(k=float(k), pp=pp_intensity(k, n, p), ac=phi(k, p, tol))


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("RNMS_THREADS", "1")))
    except ValueError:
        return 1


def spectrum_scan(
    k_lo: float,
    k_hi: float,
    step: float,
    n: int = 6,
    p=(0.5, 0.5),
    tol: float = 1e-12,
    include_roots: bool = False,
    workers: int | None = None,
) -> list[SpectrumSample]:
    """pp_intensity and phi on the grid k_lo + j*step.

    With ``include_roots`` the points q*lambda in range are added, where phi
    vanishes.  Values depend only on k, so grids that share a point agree
    there whatever the step or worker count.
    """
    p = tuple(float(q) for q in ProbVector.coerce(p, 1))
    ks = list(_grid(k_lo, k_hi, step))
    if include_roots:
        lam = lambda_value(1)
        q_lo, q_hi = math.ceil(k_lo / lam), math.floor(k_hi / lam)
        ks = sorted(set(ks) | {float(q * lam) for q in range(q_lo, q_hi + 1)})
    workers = default_workers() if workers is None else workers
    tasks = [(k, n, p, tol) for k in ks]
    if workers > 1 and len(tasks) > 1000:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(_eval_point, tasks, chunksize=256))
    return [_eval_point(t) for t in tasks]
