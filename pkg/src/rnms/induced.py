"""Induced substitutions on legal l-words and Perron-Frobenius word frequencies.

The induced matrix has entry (i, j) equal to the expected number of times the
legal word ``words[i]`` appears among the first |zeta(w_j[0])| sliding windows
of length l of a random image of ``words[j]``.  Its statistically normalised
right PF eigenvector gives the cylinder frequencies of the shift-invariant
measure on the hull.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .algebra import lambda_conjugate, lambda_value
from .words import ProbVector, all_images, iterate_seed_patch, legal_words, word_length, to_array

__all__ = [
    "InducedMatrix",
    "FrequencyVector",
    "ConvergenceError",
    "induced_images",
    "induced_matrix",
    "pf_frequencies",
    "pair_frequencies_closed_form",
    "pair_matrix_closed_form",
    "empirical_frequencies",
]


class ConvergenceError(RuntimeError):
    """Power iteration did not reach the requested residual."""


@lru_cache(maxsize=64)
def _legal(m: int, ell: int) -> tuple[str, ...]:
    return tuple(sorted(legal_words(m, ell)))


def induced_images(w: str, m: int, p) -> list[tuple[tuple[str, ...], object]]:
    """Each random image of the legal word ``w`` as its window sequence, with probability."""
    p = ProbVector.coerce(p, m)
    ell = len(w)
    if w not in _legal(m, ell):
        raise ValueError(f"{w!r} is not a legal word for m={m}")
    n_windows = m + 1 if w[0] == "a" else 1
    out = []
    for v, prob in all_images(w, m, p):
        out.append((tuple(v[k : k + ell] for k in range(n_windows)), prob))
    return out


@dataclass
class InducedMatrix:
    m: int
    ell: int
    words: list[str]
    entries: np.ndarray

    def index(self, w: str) -> int:
        return self.words.index(w)

    def as_float(self) -> np.ndarray:
        return np.asarray(self.entries, dtype=float)

    def is_primitive(self) -> bool:
        n = len(self.words)
        pattern = (self.as_float() > 0).astype(np.int64)
        power = np.eye(n, dtype=np.int64)
        # Wielandt: primitive iff the (n^2 - 2n + 2)-th power is positive
        for _ in range(max(1, n * n - 2 * n + 2)):
            power = np.minimum(power @ pattern, 1)
        return bool(np.all(power > 0))


def induced_matrix(m: int, ell: int, p) -> InducedMatrix:
    """Expected-occurrence matrix of the induced substitution on legal ``ell``-words.

    Exact (object dtype) when every probability is an int or Fraction.
    """
    p = ProbVector.coerce(p, m)
    words = list(_legal(m, ell))
    index = {w: i for i, w in enumerate(words)}
    exact = all(isinstance(q, (int, Fraction)) for q in p)
    zero = Fraction(0) if exact else 0.0
    entries = np.full((len(words), len(words)), zero, dtype=object if exact else float)
    for j, w in enumerate(words):
        for windows, prob in induced_images(w, m, p):
            for u in windows:
                entries[index[u], j] += prob
    return InducedMatrix(m=m, ell=ell, words=words, entries=entries)


class FrequencyVector(Mapping):
    """Word -> frequency.

    Carries the PF eigenvalue and residual when it came from a matrix, and the
    number of windows counted when it came from a patch.
    """

    def __init__(
        self, words, values, eigenvalue: float | None = None, residual: float | None = None, sample_size: int | None = None
    ):
        self.words = tuple(words)
        self.values = np.asarray(values, dtype=float)
        self.eigenvalue = eigenvalue
        self.residual = residual
        self.sample_size = sample_size
        self._index = {w: i for i, w in enumerate(self.words)}

    def __getitem__(self, w: str) -> float:
        return float(self.values[self._index[w]])

    def get(self, w, default=0.0):
        i = self._index.get(w)
        return default if i is None else float(self.values[i])

    def __iter__(self):
        return iter(self.words)

    def __len__(self):
        return len(self.words)

    def __repr__(self):
        body = ", ".join(f"{w}: {v:.6g}" for w, v in zip(self.words, self.values))
        return f"FrequencyVector({{{body}}})"


def pf_frequencies(M: InducedMatrix, tol: float = 1e-12, max_iter: int = 10**5) -> FrequencyVector:
    """Dominant right eigenvector of M, normalised to sum 1, by power iteration.

    Iterates with M + I, which has the same eigenvectors but no other
    eigenvalue on the dominant circle, so imprimitive (degenerate p) cases
    still converge when the dominant eigenvalue is simple.
    """
    A = M.as_float()
    n = A.shape[0]
    v = np.full(n, 1.0 / n)
    lam = 0.0
    residual = np.inf
    for _ in range(max_iter):
        w = A @ v
        lam = w.sum() / v.sum()
        residual = np.abs(w - lam * v).max()
        if residual <= tol:
            break
        v = w + v
        v /= v.sum()
    else:
        raise ConvergenceError(f"power iteration did not converge (residual {residual:.3g} after {max_iter} steps)")
    v = np.clip(v, 0.0, None)
    v /= v.sum()
    return FrequencyVector(M.words, v, eigenvalue=float(lam), residual=float(residual))


def pair_matrix_closed_form(m: int, p) -> np.ndarray:
    """The 4x4 induced matrix for two-letter words (aa, ab, ba, bb) in closed form."""
    p = ProbVector.coerce(p, m)
    p0, pm = p[0], p[m]
    q = p0 * pm
    one = Fraction(1) if isinstance(q, (int, Fraction)) else 1.0
    rows = [
        [m - 1 + q, m - 1 + p0, 1 - p0, one],
        [1 - q, 1 - p0, p0, 0 * one],
        [1 - q, one, 0 * one, 0 * one],
        [q, 0 * one, 0 * one, 0 * one],
    ]
    return np.array(rows, dtype=object if isinstance(one, Fraction) else float)


def pair_frequencies_closed_form(m: int, p) -> np.ndarray:
    """Closed-form frequencies of (aa, ab, ba, bb)."""
    p = ProbVector.coerce(p, m)
    lam, lamc = lambda_value(m), lambda_conjugate(m)
    q = float(p[0]) * float(p[m])
    denom = m * (1 + q) - (2 + 2 * lam - m) * (q - 1)
    return np.array([2 * (lam - 1), 2 * (1 - q), 2 * (1 - q), 2 * (1 + lamc) * q]) / denom


def _window_codes(letters: np.ndarray, ell: int) -> np.ndarray:
    codes = np.zeros(len(letters) - ell + 1, dtype=np.int64)
    for j in range(ell):
        codes = (codes << 1) | letters[j : len(letters) - ell + 1 + j]
    return codes


def empirical_frequencies(m: int, p, ell: int, steps: int | None = None, seed: int = 0, min_length: int = 10**4) -> FrequencyVector:
    """Sliding-window frequencies of ``ell``-words in a random two-sided patch.

    Without ``steps``, the smallest number of substitution steps giving at
    least ``min_length`` letters is used.
    """
    if ell > 62:
        raise ValueError("ell must be at most 62")
    if steps is None:
        steps = 0
        while 2 * word_length(m, steps + 2) < min_length:
            steps += 1
    patch = iterate_seed_patch(m, p, steps, seed)
    letters = to_array(patch.word).astype(np.int64)
    codes = _window_codes(letters, ell)
    uniq, counts = np.unique(codes, return_counts=True)
    words = [format(int(c), f"0{ell}b").replace("0", "a").replace("1", "b") for c in uniq]
    order = np.argsort(words)
    return FrequencyVector([words[i] for i in order], counts[order] / counts.sum(), sample_size=int(counts.sum()))
