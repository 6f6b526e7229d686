from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rnms.algebra import lambda_value
from rnms.induced import (
    ConvergenceError,
    empirical_frequencies,
    induced_images,
    induced_matrix,
    pair_frequencies_closed_form,
    pair_matrix_closed_form,
    pf_frequencies,
)
from rnms.words import ProbVector, legal_words


@st.composite
def prob_vectors(draw, m):
    weights = [draw(st.integers(1, 50)) for _ in range(m + 1)]
    total = sum(weights)
    return ProbVector([Fraction(w, total) for w in weights])


def test_induced_images_examples():
    assert induced_images("b", 1, [0.5, 0.5]) == [(("a",), 1.0)]
    imgs = induced_images("ba", 1, [Fraction(1, 3), Fraction(2, 3)])
    windows = {w: p for w, p in imgs}
    assert windows == {("ab",): Fraction(1, 3), ("aa",): Fraction(2, 3)}
    assert sum(p for _, p in induced_images("aba", 2, ProbVector.uniform(2))) == 1
    with pytest.raises(ValueError):
        induced_images("bbb", 2, ProbVector.uniform(2))


def test_length_one_is_substitution_matrix():
    for m in (1, 2, 5):
        M = induced_matrix(m, 1, ProbVector.uniform(m))
        assert M.words == ["a", "b"]
        assert (M.entries == np.array([[m, 1], [1, 0]], dtype=object)).all()


def test_column_sums_count_windows():
    M = induced_matrix(1, 2, [0.5, 0.5])
    assert np.allclose(M.as_float().sum(axis=0), [2, 2, 1, 1])
    M = induced_matrix(3, 3, ProbVector.uniform(3))
    expected = [4 if w[0] == "a" else 1 for w in M.words]
    assert np.allclose(M.as_float().sum(axis=0), expected)


@pytest.mark.parametrize("m", [1, 2, 3])
@settings(max_examples=20, deadline=None)
@given(data=st.data())
def test_pair_matrix_exact(m, data):
    p = data.draw(prob_vectors(m))
    M = induced_matrix(m, 2, p)
    assert M.words == ["aa", "ab", "ba", "bb"]
    assert (M.entries == pair_matrix_closed_form(m, p)).all()


@pytest.mark.parametrize("m", [1, 2, 3])
@settings(max_examples=20, deadline=None)
@given(data=st.data())
def test_pair_frequencies_closed_form(m, data):
    p = data.draw(prob_vectors(m))
    f = pf_frequencies(induced_matrix(m, 2, p))
    assert np.abs(f.values - pair_frequencies_closed_form(m, p)).max() <= 1e-10
    assert f.values.sum() == pytest.approx(1, abs=1e-12)
    assert f.eigenvalue == pytest.approx(lambda_value(m), abs=1e-10)


def test_pair_frequency_example():
    f = pf_frequencies(induced_matrix(1, 2, [0.5, 0.5]))
    assert np.allclose(f.values, [0.27922, 0.33883, 0.33883, 0.04314], atol=1e-4)


def test_letter_frequencies():
    for m in (1, 2, 4):
        lam = lambda_value(m)
        f = pf_frequencies(induced_matrix(m, 1, ProbVector.uniform(m)))
        assert f["a"] == pytest.approx(lam / (lam + 1), abs=1e-12)
        assert f["b"] == pytest.approx(1 / (lam + 1), abs=1e-12)


@pytest.mark.parametrize("m,ell", [(1, 3), (1, 5), (2, 3), (3, 3)])
def test_eigenvalue_and_consistency(m, ell):
    p = ProbVector.uniform(m)
    M = induced_matrix(m, ell, p)
    assert M.is_primitive()
    f = pf_frequencies(M)
    g = pf_frequencies(induced_matrix(m, ell + 1, p))
    assert f.eigenvalue == pytest.approx(lambda_value(m), abs=1e-10)
    for w in f:
        assert f[w] == pytest.approx(g.get(w + "a") + g.get(w + "b"), abs=1e-9)
        assert f[w] == pytest.approx(g.get("a" + w) + g.get("b" + w), abs=1e-9)


def test_measure_depends_on_p_but_hull_does_not():
    f1 = pf_frequencies(induced_matrix(1, 3, [0.5, 0.5]))
    f2 = pf_frequencies(induced_matrix(1, 3, [0.2, 0.8]))
    assert f1.words == f2.words == tuple(sorted(legal_words(1, 3)))
    assert np.abs(f1.values - f2.values).max() > 1e-3


def test_degenerate_p():
    for m, p in [(1, [1, 0]), (2, [0, 1, 0]), (2, [0.5, 0.5, 0])]:
        f = pf_frequencies(induced_matrix(m, 2, p))
        assert f["bb"] == pytest.approx(0, abs=1e-10)
        assert np.abs(f.values - pair_frequencies_closed_form(m, p)).max() <= 1e-10


def test_convergence_error():
    with pytest.raises(ConvergenceError):
        pf_frequencies(induced_matrix(1, 4, [0.5, 0.5]), tol=1e-30, max_iter=50)


def test_empirical_pairs():
    f = empirical_frequencies(1, [0.5, 0.5], 2, min_length=10**5, seed=3)
    assert np.allclose([f[w] for w in ("aa", "ab", "ba", "bb")], [0.27922, 0.33883, 0.33883, 0.04314], atol=0.01)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_empirical_letters(m):
    lam = lambda_value(m)
    f = empirical_frequencies(m, ProbVector.uniform(m), 1, min_length=10**5, seed=1)
    assert f["a"] == pytest.approx(lam / (lam + 1), abs=0.01)


@pytest.mark.parametrize("m,i", [(1, 0), (2, 1), (3, 3)])
def test_empirical_deterministic_matches_pf(m, i):
    p = ProbVector.deterministic(m, i)
    emp = empirical_frequencies(m, p, 3, min_length=10**5)
    pf = pf_frequencies(induced_matrix(m, 3, p))
    for w in pf:
        assert emp.get(w) == pytest.approx(pf[w], abs=0.005)


def test_empirical_longer_words_match_pf():
    p = [0.3, 0.7]
    emp = empirical_frequencies(1, p, 4, min_length=2 * 10**5, seed=5)
    pf = pf_frequencies(induced_matrix(1, 4, p))
    for w in pf:
        assert emp.get(w) == pytest.approx(pf[w], abs=0.01)
