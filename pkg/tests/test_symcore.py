import math

import numpy as np
import pytest
from hypothesis import given
from numpy.testing import assert_allclose

from dewitt.exceptions import DimensionMismatchError, NotPositiveDefiniteError, NotSymmetricError
from dewitt.symcore import (
    ad_series_operator,
    as_spd,
    as_sym,
    is_spd,
    relative_log,
    sym_exp,
    sym_log,
    trace,
    trace_inner,
    traceless_part,
)

from strategies import rand_spd, rand_sym, spd_matrices, sym_matrices


@pytest.mark.parametrize(
    "h, expected",
    [
        (np.eye(2), np.zeros((2, 2))),
        (np.diag([1.0, -1.0]), np.diag([1.0, -1.0])),
        (np.diag([2.0, 0.0]), np.diag([1.0, -1.0])),
    ],
)
def test_traceless_part_examples(h, expected):
    assert_allclose(traceless_part(h), expected, atol=1e-15)


def test_trace_inner_examples(rng):
    assert trace_inner(np.eye(3), np.eye(3)) == 3
    assert trace_inner(np.diag([1.0, -1.0]), np.eye(2)) == 0
    h, k = rand_sym(rng, 4), rand_sym(rng, 4)
    assert trace_inner(h, k) == pytest.approx(np.sum(h * k), rel=1e-14)


def test_sym_exp_log_examples():
    assert_allclose(sym_exp(np.zeros((3, 3))), np.eye(3), atol=1e-15)
    assert_allclose(sym_exp(np.diag([math.log(2), math.log(3)])), np.diag([2.0, 3.0]), rtol=1e-14)
    assert_allclose(sym_log(np.eye(2)), np.zeros((2, 2)), atol=1e-15)
    assert_allclose(sym_log(np.diag([4.0, 9.0])), np.diag([math.log(4), math.log(9)]), rtol=1e-14)


def test_sym_exp_matches_power_series(rng):
    a = rand_sym(rng, 4, scale=0.5)
    series, term = np.eye(4), np.eye(4)
    for m in range(1, 30):
        term = term @ a / m
        series = series + term
    assert_allclose(sym_exp(a), series, rtol=1e-12, atol=1e-12)


@given(spd_matrices())
def test_log_exp_roundtrip(p):
    assert_allclose(sym_exp(sym_log(p)), p, rtol=1e-10, atol=1e-12 * np.abs(p).max())


@given(sym_matrices())
def test_exp_eigenvalues(a):
    w = np.linalg.eigvalsh(a)
    assert_allclose(np.linalg.eigvalsh(sym_exp(a)), np.exp(w), rtol=1e-10)


@given(sym_matrices())
def test_traceless_part_idempotent(h):
    h0 = traceless_part(h)
    assert abs(trace(h0)) <= 1e-13 * max(1.0, np.linalg.norm(h))
    assert_allclose(traceless_part(h0), h0, atol=1e-13 * max(1.0, np.linalg.norm(h)))


def test_relative_log(rng):
    g0 = rand_spd(rng, 3)
    assert_allclose(relative_log(g0, g0), 0, atol=1e-14)
    assert_allclose(relative_log(np.eye(2), math.e * np.eye(2)), np.eye(2), atol=1e-14)
    g = rand_spd(rng, 3)
    rec = g0 @ _mixed_exp(relative_log(g0, g))
    assert_allclose(rec, g, rtol=1e-9)


def _mixed_exp(a):
    # a is diagonalisable with real spectrum but not symmetric
    w, v = np.linalg.eig(a)
    return np.real(v @ np.diag(np.exp(w)) @ np.linalg.inv(v))


def test_relative_log_recovers_g0_symmetric_exponent(rng):
    g0 = rand_spd(rng, 4)
    b = np.linalg.solve(g0, rand_sym(rng, 4))  # g0-symmetric mixed tensor
    assert_allclose(relative_log(g0, g0 @ _mixed_exp(b)), b, rtol=1e-9, atol=1e-10)


def test_ad_series_examples(rng):
    k = rand_sym(rng, 3)
    assert_allclose(ad_series_operator(np.zeros((3, 3)), k), k, atol=0)
    lam = 0.3
    assert_allclose(ad_series_operator(lam * np.eye(3), k), math.exp(3 * lam / 2) * k, rtol=1e-14)
    # normalisation making <Id, Id>'_0 = 1
    for n in (2, 3, 5):
        assert trace_inner(np.eye(n), ad_series_operator(np.zeros((n, n)), np.eye(n))) / n == 1.0


def test_ad_series_is_trace_symmetric(rng):
    l, h, k = (rand_sym(rng, 4) for _ in range(3))
    lhs = trace_inner(h, ad_series_operator(l, k))
    rhs = trace_inner(k, ad_series_operator(l, h))
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_ad_series_against_sinh_closed_form(rng):
    # for diagonal L the operator acts entrywise: 2(cosh(x) - 1)/x^2 with x = l_i - l_j
    d = np.array([0.4, -1.3, 2.1])
    k = rand_sym(rng, 3)
    x = d[:, None] - d[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        factor = np.where(x == 0, 1.0, 2 * (np.cosh(x) - 1) / x**2)
    expected = math.exp(d.sum() / 2) * factor * k
    assert_allclose(ad_series_operator(np.diag(d), k), expected, rtol=1e-13)


def test_symmetry_tolerance():
    a = np.array([[1.0, 2.0], [2.0 + 1e-12, 1.0]])
    out = as_sym(a)
    assert out[0, 1] == out[1, 0]
    with pytest.raises(NotSymmetricError):
        as_sym(np.array([[1.0, 2.0], [2.1, 1.0]]))
    with pytest.raises(NotSymmetricError):
        as_sym(np.array([[1.0, np.nan], [np.nan, 1.0]]))


def test_spd_checks():
    assert is_spd(np.eye(3))
    assert not is_spd(np.diag([1.0, 1e-13]))
    with pytest.raises(NotPositiveDefiniteError):
        as_spd(np.diag([1.0, -1.0]))
    with pytest.raises(DimensionMismatchError):
        trace_inner(np.eye(2), np.eye(3))
