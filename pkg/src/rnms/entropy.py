"""Topological entropy of the random noble means hull (natural logarithm)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .algebra import lambda_conjugate, lambda_value
from .words import DEFAULT_CAP, count_exact_words, word_length

__all__ = ["EntropyReport", "entropy_series", "entropy_tail_bound", "entropy_empirical", "entropy_report"]


@dataclass
class EntropyReport:
    m: int
    series_value: float
    truncation_order: int
    empirical: list[tuple[int, float]] = field(default_factory=list)


def _prefactor(m: int) -> float:
    return (lambda_value(m) - 1) / (1 - lambda_conjugate(m))


def entropy_tail_bound(m: int, n: int) -> float:
    """Upper bound on the omitted part of the series after the term i = n.

    Uses log(m(i-1)+1) <= log(m i) <= log(m n) + (i - n) for i > n, which
    sums to at most (log(m n) + 2) / (lambda^n (1 - 1/lambda)); the result
    includes the series prefactor.
    """
    lam = lambda_value(m)
    return _prefactor(m) * (math.log(m * n) + 2) / (lam**n * (1 - 1 / lam))


def _series(m: int, tol: float) -> tuple[float, int]:
    if tol <= 0:
        raise ValueError("tol must be positive")
    log_lam = math.log(lambda_value(m))
    terms = []
    i = 2
    while True:
        terms.append(math.exp(math.log(math.log(m * (i - 1) + 1)) - i * log_lam))
        if entropy_tail_bound(m, i) <= tol:
            break
        i += 1
    return _prefactor(m) * math.fsum(terms), i


def entropy_series(m: int, tol: float = 1e-12) -> float:
    """H_m from its closed series, truncated once the analytic tail bound is below ``tol``."""
    return _series(m, tol)[0]


def entropy_empirical(m: int, k: int, cap: int = DEFAULT_CAP) -> float:
    """log |G_{m,k}| / l_{m,k} by explicit enumeration of exact words."""
    return math.log(count_exact_words(m, k, cap)) / word_length(m, k)


def entropy_report(m: int, k_max: int = 0, tol: float = 1e-12, cap: int = DEFAULT_CAP) -> EntropyReport:
    value, order = _series(m, tol)
    empirical = [(k, entropy_empirical(m, k, cap)) for k in range(1, k_max + 1)]
    return EntropyReport(m=m, series_value=value, truncation_order=order, empirical=empirical)
