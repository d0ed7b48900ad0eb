import math
import warnings
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from dcmlab.degseq import BiDegreeSequence, compute_params
from dcmlab.oracle import exact_motif_probability
from dcmlab.theory import (
    CriticalWindowWarning,
    MotifProfile,
    complex_motif_expectation_bounds,
    cycle_lower_bound,
    cycle_motif,
    expected_cycle_count_bound,
    kth_largest_tail,
    medium_cycle_tail_bound,
    path_motif,
    prediction_csv,
    prediction_table,
    s_motif,
    scc_count_upper_bound,
    size_class_thresholds,
    subgraph_upper_bound,
    t_motif,
    xi_alpha,
)


def quad_e1(x):
    mpmath.mp.dps = 30
    return float(mpmath.quad(lambda t: mpmath.exp(-t) / t, [x, x + 1, x + 10, mpmath.inf]))


def test_xi_against_quadrature_grid():
    for x in np.geomspace(0.05, 20, 50):
        ref = quad_e1(x)
        assert abs(xi_alpha(x) - ref) <= 1e-12 * ref


def test_xi_known_values():
    assert abs(xi_alpha(1) - 0.219383934395520) < 1e-12
    assert abs(xi_alpha(0.5) - 0.559773594776160) < 1e-12
    assert xi_alpha(50) < math.exp(-50) / 50
    with pytest.raises(ValueError):
        xi_alpha(0)
    with pytest.raises(ValueError):
        xi_alpha(-1)


def test_xi_decreasing():
    xs = np.linspace(0.01, 30, 400)
    vals = [xi_alpha(x) for x in xs]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_kth_tail():
    assert abs(kth_largest_tail(1, 1) - 0.19698664548515) < 1e-13
    assert abs(kth_largest_tail(1, 1) - 0.19698) < 1e-5
    xi = xi_alpha(1)
    assert kth_largest_tail(1, 2) == pytest.approx(1 - math.exp(-xi) * (1 + xi), abs=1e-15)
    assert abs(kth_largest_tail(1, 2) - 0.0208184) < 1e-7
    assert kth_largest_tail(60, 1) < 1e-27
    with pytest.raises(ValueError):
        kth_largest_tail(1, 0)
    for a in (0.3, 1, 2):
        tails = [kth_largest_tail(a, k) for k in range(1, 6)]
        assert all(b < t for t, b in zip(tails, tails[1:]))
    for k in (1, 2, 3):
        tails = [kth_largest_tail(a, k) for a in np.linspace(0.1, 5, 30)]
        assert all(b < t for t, b in zip(tails, tails[1:]))


def test_prediction_csv():
    text = prediction_csv(prediction_table([1.0], [1, 2]))
    assert text.splitlines()[0] == "alpha,k,xi,tail"
    assert len(text.splitlines()) == 3


def test_motif_profiles():
    for H in (cycle_motif(4), path_motif(3), s_motif(1, 2, 2), t_motif(2, 3)):
        assert sum(H.degree_hist.values()) == H.h
        assert sum(i * c for (i, _), c in H.degree_hist.items()) == H.k
        assert sum(j * c for (_, j), c in H.degree_hist.items()) == H.k
    assert cycle_motif(5).aut == 5
    assert MotifProfile.from_edges(3, [(0, 1), (1, 2), (2, 0)]).aut == 3
    assert t_motif(2, 2).aut == 2


ALL4 = BiDegreeSequence.from_pairs([(1, 1)] * 4)


def test_upper_bound_examples():
    p = compute_params(ALL4)
    edge = subgraph_upper_bound(path_motif(1), p, 4, 4)
    assert edge.p_plus == Fraction(1, 3)
    assert exact_motif_probability(ALL4, path_motif(1)) == Fraction(1, 4)
    two = subgraph_upper_bound(cycle_motif(2), p, 4, 4)
    assert two.p_plus == Fraction(1, 9)
    assert exact_motif_probability(ALL4, cycle_motif(2)) == Fraction(1, 12)
    # in-degree 2 is impossible in an all-(1,1) sequence
    star = MotifProfile.from_edges(3, [(1, 0), (2, 0)])
    assert subgraph_upper_bound(star, p, 4, 4).p_plus == 0


def test_upper_bound_missing_moment():
    p = compute_params(ALL4, order=1)
    with pytest.raises(KeyError):
        subgraph_upper_bound(t_motif(2, 2), p, 4, 4)


def test_cycle_lower_bound_examples():
    p = compute_params(ALL4)
    lb = cycle_lower_bound(2, p, 4, 4, 1, 1)
    assert lb.vacuous and lb.value == 0
    assert exact_motif_probability(ALL4, cycle_motif(2)) >= lb.value
    big = compute_params(BiDegreeSequence.from_pairs([(1, 1)] * 10))
    n = 10**4
    lb = cycle_lower_bound(2, big, n, n, 1, Fraction(1, 2))
    # 2 h^2 Delta^2 / (eps n) = 8 / 5000
    want = Fraction(1, n * (n - 1)) * (1 - Fraction(16, 10**4)) * (1 - Fraction(1, 10**4))
    assert lb.value == want and not lb.vacuous
    assert float(lb.value * n * (n - 1)) == pytest.approx(0.99830016, rel=1e-8)


def test_loop_lower_bound_enumerated():
    for pairs in ([(1, 1)] * 3, [(2, 2), (1, 1)], [(2, 1), (1, 2), (1, 1)], [(3, 3), (1, 1), (1, 1)]):
        seq = BiDegreeSequence.from_pairs(pairs)
        p = compute_params(seq)
        lb = cycle_lower_bound(1, p, seq.n, seq.m, seq.max_degree, Fraction(1, 2))
        assert exact_motif_probability(seq, cycle_motif(1)) >= lb.value


def test_expected_cycle_count_bound():
    m = 50
    assert expected_cycle_count_bound(1, 0.0, m) == pytest.approx(math.exp(2 / m))
    assert expected_cycle_count_bound(40, -0.1, 10**6) == pytest.approx(math.exp(-4 + 0.0032) / 40)
    assert expected_cycle_count_bound(40, -0.1, 10**6) == pytest.approx(4.6e-4, rel=0.01)
    m, q = 10**5, -0.1
    h_star = int(m * abs(q) / 4)
    vals = [expected_cycle_count_bound(h, q, m) for h in range(1, h_star)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        expected_cycle_count_bound(5, q, 5)


def test_medium_cycle_tail():
    assert medium_cycle_tail_bound(200, -0.1) == pytest.approx(4.15697e-6, rel=1e-5)
    assert medium_cycle_tail_bound(20, -0.1) == pytest.approx(xi_alpha(1), rel=1e-14)
    assert medium_cycle_tail_bound(10**6, -0.1) < 1e-300 or medium_cycle_tail_bound(10**5, -0.1) < 1e-200
    with pytest.raises(ValueError):
        medium_cycle_tail_bound(10, 0.0)


def test_scc_count_bound_examples():
    assert scc_count_upper_bound(2, 1, 0) == 12
    assert scc_count_upper_bound(1, 0, 1) == 2
    assert scc_count_upper_bound(3, 1, 0) == 108
    with pytest.raises(ValueError):
        scc_count_upper_bound(2, 1, 1)
    with pytest.raises(ValueError):
        scc_count_upper_bound(3, 0, 0)


class _P:
    def __init__(self, q, rm, rp, mu=1.0):
        self.q, self.r_minus, self.r_plus, self.mu = q, rm, rp, mu


def test_complex_motif_bounds():
    b = complex_motif_expectation_bounds(_P(-0.1, 0.5, 0.5), 10**5, 2)
    assert b.bound_S == pytest.approx(0.04)
    assert b.bound_T == pytest.approx(0.004)
    big = complex_motif_expectation_bounds(_P(-0.1, 0.5, 0.5), 10**9, 2)
    assert big.bound_S < 1e-5 and big.bound_T < 1e-6
    tr = complex_motif_expectation_bounds(_P(-0.1, 0.5, 0.5), 10**5, 2, g=30)
    assert tr.truncated_S <= tr.bound_S and tr.truncated_T <= tr.bound_T
    with pytest.raises(ValueError):
        complex_motif_expectation_bounds(_P(0.0, 0.5, 0.5), 10**5, 2)


def test_size_class_thresholds():
    p = _P(-0.1, 0.5, 0.5, mu=0.8)
    th = size_class_thresholds(200_000, -0.1, p)
    # n|Q|^3/(R-R+) = 800
    assert th.criticality == pytest.approx(800)
    assert th.s == pytest.approx(800 ** (1 / 6))
    assert th.g == math.ceil(th.s / 0.1) == 31
    assert th.f > th.g
    assert th.g * 0.1 == pytest.approx(th.s, abs=0.1)
    assert all(th.checks.values())
    with pytest.warns(CriticalWindowWarning):
        size_class_thresholds(4, -0.5, _P(-0.5, 0.5, 0.25))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        size_class_thresholds(200_000, -0.1, p)
