"""Noble means substitutions, their random mixture, and word enumeration.

Words are plain strings over ``"ab"``.  Large patches are substituted as numpy
``uint8`` arrays (0 for ``a``, 1 for ``b``) and converted back at the end.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "ProbVector",
    "TwoSidedPatch",
    "EnumerationLimitError",
    "branch_image",
    "apply_deterministic",
    "apply_random",
    "all_images",
    "iterate_seed_patch",
    "random_word",
    "word_length",
    "exact_words",
    "exact_word_codes",
    "count_exact_words",
    "legal_words",
    "letter_counts",
    "to_array",
    "from_array",
]

DEFAULT_CAP = 10**7


class EnumerationLimitError(RuntimeError):
    """An enumeration would exceed its size cap or branch budget."""


@dataclass(frozen=True)
class ProbVector:
    """Choosing probabilities (p_0, ..., p_m) of the random substitution."""

    probs: tuple

    def __init__(self, probs: Iterable):
        probs = tuple(probs)
        object.__setattr__(self, "probs", probs)
        if len(probs) < 2:
            raise ValueError("need at least two choosing probabilities (m >= 1)")
        if any(not (0 <= q <= 1) for q in probs):
            raise ValueError(f"probabilities must lie in [0, 1]: {probs}")
        total = sum(probs)
        exact = all(isinstance(q, (int, Fraction)) for q in probs)
        if (exact and total != 1) or abs(total - 1) > 1e-12:
            raise ValueError(f"probabilities must sum to 1, got {float(total)!r}")

    @classmethod
    def uniform(cls, m: int) -> ProbVector:
        return cls([Fraction(1, m + 1)] * (m + 1))

    @classmethod
    def deterministic(cls, m: int, i: int) -> ProbVector:
        if not 0 <= i <= m:
            raise ValueError(f"branch index {i} out of range 0..{m}")
        return cls([1 if j == i else 0 for j in range(m + 1)])

    @classmethod
    def coerce(cls, p, m: int | None = None) -> ProbVector:
        pv = p if isinstance(p, ProbVector) else cls(p)
        if m is not None and pv.m != m:
            raise ValueError(f"probability vector has {len(pv)} entries, expected m + 1 = {m + 1}")
        return pv

    @property
    def m(self) -> int:
        return len(self.probs) - 1

    @property
    def generic(self) -> bool:
        return all(q > 0 for q in self.probs)

    def __len__(self):
        return len(self.probs)

    def __getitem__(self, i):
        return self.probs[i]

    def __iter__(self):
        return iter(self.probs)

    def as_array(self) -> np.ndarray:
        return np.array([float(q) for q in self.probs])


@dataclass(frozen=True)
class TwoSidedPatch:
    """``left | right`` around the origin marker; ``left[-1]`` touches the marker."""

    left: str
    right: str

    def __post_init__(self):
        if not self.left or not self.right:
            raise ValueError("both sides of a patch must be non-empty")

    @property
    def word(self) -> str:
        return self.left + self.right

    def __len__(self):
        return len(self.left) + len(self.right)

    def __str__(self):
        return f"{self.left}|{self.right}"


def to_array(w: str) -> np.ndarray:
    arr = np.frombuffer(w.encode("ascii"), dtype=np.uint8)
    out = (arr == ord("b")).astype(np.uint8)
    if len(w) and not np.all((arr == ord("a")) | (arr == ord("b"))):
        raise ValueError("words are over the alphabet {a, b}")
    return out


def from_array(arr: np.ndarray) -> str:
    return np.where(np.asarray(arr, dtype=bool), ord("b"), ord("a")).astype(np.uint8).tobytes().decode("ascii")


def letter_counts(w: str) -> tuple[int, int]:
    """(number of a, number of b)."""
    nb = w.count("b")
    return len(w) - nb, nb


def branch_image(m: int, i: int) -> str:
    """zeta_{m,i}(a) = a^i b a^(m-i)."""
    if not 0 <= i <= m:
        raise ValueError(f"branch index {i} out of range 0..{m}")
    return "a" * i + "b" + "a" * (m - i)


def apply_deterministic(w: str, m: int, i: int) -> str:
    image = branch_image(m, i)
    return "".join(image if c == "a" else "a" for c in w)


def _substitute(letters: np.ndarray, m: int, branches: np.ndarray) -> np.ndarray:
    """Letterwise image: position j (an a) goes to a^i b a^(m-i) with i = branches[j]."""
    is_a = letters == 0
    lengths = np.where(is_a, m + 1, 1)
    starts = np.cumsum(lengths) - lengths
    out = np.zeros(int(lengths.sum()), dtype=np.uint8)
    out[starts[is_a] + branches[is_a]] = 1
    return out


def _branch_choices(n: int, p: ProbVector, seed: int, generation: int, stream: int) -> np.ndarray:
    """Branch index per position, from a counter-based stream keyed by (seed, generation, stream).

    The j-th uniform of the stream belongs to position j, so choices do not
    depend on how a caller walks the word.
    """
    key = np.random.SeedSequence([seed & (2**64 - 1), generation, stream]).generate_state(2, np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    u = rng.random(n)
    cum = np.cumsum(p.as_array())
    return np.minimum(np.searchsorted(cum, u, side="right"), p.m).astype(np.int64)


def apply_random(w: str, m: int, p, seed: int, generation: int = 0, stream: int = 0) -> str:
    """One random image of ``w``: every ``a`` picks its branch independently."""
    p = ProbVector.coerce(p, m)
    letters = to_array(w)
    return from_array(_substitute(letters, m, _branch_choices(len(letters), p, seed, generation, stream)))


def all_images(w: str, m: int, p=None) -> list[tuple[str, object]]:
    """Every branch combination for the letters of ``w`` with its probability.

    With ``p=None`` all (m+1)^(#a) combinations are listed with probability
    ``None``; otherwise zero-probability combinations are dropped.
    """
    apos = [j for j, c in enumerate(w) if c == "a"]
    if p is not None:
        p = ProbVector.coerce(p, m)
        branches = [i for i in range(m + 1) if p[i] != 0]
    else:
        branches = list(range(m + 1))
    images = [branch_image(m, i) for i in range(m + 1)]
    out = []
    for combo in itertools.product(branches, repeat=len(apos)):
        parts = []
        it = iter(combo)
        for c in w:
            parts.append(images[next(it)] if c == "a" else "a")
        prob = None
        if p is not None:
            prob = math.prod((p[i] for i in combo), start=1)
        out.append(("".join(parts), prob))
    return out


def iterate_seed_patch(m: int, p, steps: int, seed: int, start: tuple[str, str] = ("a", "a")) -> TwoSidedPatch:
    """Apply the random substitution ``steps`` times to the two-sided seed ``start``.

    Each side is substituted independently (its own random stream); the image
    of the left word is placed so that it ends at the marker.
    """
    if steps < 0:
        raise ValueError("steps must be non-negative")
    p = ProbVector.coerce(p, m)
    left, right = to_array(start[0]), to_array(start[1])
    for g in range(steps):
        left = _substitute(left, m, _branch_choices(len(left), p, seed, g, 0))
        right = _substitute(right, m, _branch_choices(len(right), p, seed, g, 1))
    return TwoSidedPatch(from_array(left), from_array(right))


def random_word(m: int, p, steps: int, seed: int, start: str = "b") -> str:
    """A random image of ``start`` under ``steps`` applications of the random substitution."""
    p = ProbVector.coerce(p, m)
    w = to_array(start)
    for g in range(steps):
        w = _substitute(w, m, _branch_choices(len(w), p, seed, g, 2))
    return from_array(w)


def word_length(m: int, k: int) -> int:
    """l_{m,k}: l_1 = l_2 = 1 and l_k = m l_{k-1} + l_{k-2}."""
    if k < 1:
        raise ValueError("k must be >= 1")
    prev, cur = 1, 1
    for _ in range(k - 2):
        prev, cur = cur, m * cur + prev
    return cur


def _concat_codes(sets: Sequence[np.ndarray], widths: Sequence[int]) -> np.ndarray:
    """All concatenations (as bit codes) of one word from each set, in order."""
    acc = sets[0]
    for s, w in zip(sets[1:], widths[1:]):
        acc = ((acc[:, None] << np.uint64(w)) | s[None, :]).ravel()
    return acc


def exact_word_codes(m: int, k: int, cap: int = DEFAULT_CAP):
    """G_{m,k} as integer codes (bit j from the left set iff letter j is b).

    Returns a sorted ``uint64`` array when words fit in 64 bits and a Python
    ``set`` of ints otherwise.  Intermediate products are held to (m+1) times
    the cap so the enumeration never allocates unboundedly.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    wide = word_length(m, k) > 64
    if wide:
        levels = {1: {1}, 2: {0}}
    else:
        levels = {1: np.array([1], dtype=np.uint64), 2: np.array([0], dtype=np.uint64)}
    for n in range(3, k + 1):
        pieces = []
        for i in range(m + 1):
            idx = [n - 1 - (1 if i == j else 0) for j in range(m + 1)]
            sets = [levels[t] for t in idx]
            widths = [word_length(m, t) for t in idx]
            if math.prod(len(s) for s in sets) > (m + 1) * cap:
                raise EnumerationLimitError(f"|G_{{{m},{n}}}| enumeration exceeds cap {cap}")
            if wide:
                piece = set()
                for combo in itertools.product(*sets):
                    code = 0
                    for c, w in zip(combo, widths):
                        code = (code << w) | c
                    piece.add(code)
                pieces.append(piece)
            else:
                pieces.append(_concat_codes(sets, widths))
        level = set().union(*pieces) if wide else np.unique(np.concatenate(pieces))
        if len(level) > cap:
            raise EnumerationLimitError(f"|G_{{{m},{n}}}| = {len(level)} exceeds cap {cap}")
        levels[n] = level
        levels.pop(n - 2, None)
    return levels[k]


def _decode(code: int, length: int) -> str:
    return format(int(code), f"0{length}b").replace("0", "a").replace("1", "b")


def exact_words(m: int, k: int, cap: int = DEFAULT_CAP) -> set[str]:
    """The set G_{m,k} of exact substitution words, built by the concatenation rule."""
    length = word_length(m, k)
    return {_decode(c, length) for c in exact_word_codes(m, k, cap)}


def count_exact_words(m: int, k: int, cap: int = DEFAULT_CAP) -> int:
    return len(exact_word_codes(m, k, cap))


def legal_words(m: int, ell: int, budget: int = DEFAULT_CAP) -> set[str]:
    """All legal words of length ``ell``.

    Closure from ``{b}``: images of known words contribute their subwords of
    length <= ell until nothing new appears.  Any length-ell subword of an
    image comes from a preimage subword of length <= ell, so the fixpoint is
    complete.
    """
    if ell < 1:
        raise ValueError("ell must be >= 1")
    if (m + 1) ** ell > budget:
        raise EnumerationLimitError(f"branch budget (m+1)^ell = {(m + 1) ** ell} exceeds {budget}")
    known = {"b"}
    frontier = ["b"]
    work = 0
    while frontier:
        fresh = set()
        for w in frontier:
            images = all_images(w, m)
            work += len(images)
            if work > budget:
                raise EnumerationLimitError(f"legal-word closure exceeded budget {budget}")
            for v, _ in images:
                for n in range(1, ell + 1):
                    for j in range(len(v) - n + 1):
                        u = v[j : j + n]
                        if u not in known:
                            fresh.add(u)
        known |= fresh
        frontier = sorted(fresh)
    return {w for w in known if len(w) == ell}
