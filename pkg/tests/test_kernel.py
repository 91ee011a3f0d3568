import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from fkpp_nonlocal.kernel import Kernel, KernelError, eval_kernel, facts, sample, sample_positions

FAMILIES = [
    Kernel.zero(),
    Kernel.keller_segel(0.5, 1.0),
    Kernel.keller_segel(1.0, 0.25),
    Kernel.compact_bump(0.5, 2.0),
    Kernel.compact_bump(-1.0, 1.5),
    Kernel.power_law(1.0, 0.5),
    Kernel.power_law(2.0, 0.3, -1),
    Kernel.step(0.25),
    Kernel.tabulated(0.3 * np.exp(-0.2 * np.arange(41)), 0.2),
    Kernel.tabulated([-0.4, -0.3, -0.1], 0.5, tail="constant", monotone="non-decreasing"),
]


def test_keller_segel_jump_from_left_limit():
    k = Kernel.keller_segel(1.0, 1.0)
    assert 2 * eval_kernel(k, -1e-14) == pytest.approx(1.0, abs=1e-12)
    assert facts(k).J == 1.0


@pytest.mark.parametrize("k", FAMILIES, ids=str)
def test_value_at_origin_is_zero(k):
    assert eval_kernel(k, 0.0) == 0.0


def test_power_law_formula():
    assert eval_kernel(Kernel.power_law(1.0, 0.5), 3.0) == pytest.approx(0.5, abs=1e-15)


def test_facts_examples():
    f = facts(Kernel.keller_segel(0.5, 1.0))
    assert (f.J, f.l1_norm, f.kbar_l1, f.k_inf) == (0.5, 0.5, 0.5, 0.0)
    f = facts(Kernel.zero())
    assert (f.J, f.l1_norm, f.kbar_l1, f.k_inf) == (0.0, 0.0, 0.0, 0.0)
    f = facts(Kernel.step(0.25))
    assert f.J == -0.5 and math.isinf(f.l1_norm) and f.k_inf == 0.25 and f.kbar_l1 is None


def test_sample_examples():
    assert np.all(sample(Kernel.zero(), 0.1, 2.0) == 0.0)
    np.testing.assert_array_equal(sample(Kernel.step(1.0), 0.5, 1.0), [-1.0, -1.0, 1.0, 1.0])
    np.testing.assert_allclose(sample_positions(0.5, 1.0), [-0.75, -0.25, 0.25, 0.75])
    k = Kernel.keller_segel(1.0, 1.0)
    pos = sample_positions(0.1, 3.0)
    np.testing.assert_allclose(sample(k, 0.1, 3.0), eval_kernel(k, pos), rtol=0, atol=1e-15)


@pytest.mark.parametrize("k", FAMILIES, ids=str)
def test_odd_and_sign_constant(k):
    x = np.linspace(0.01, 30.0, 3001)
    right = eval_kernel(k, x)
    np.testing.assert_array_equal(eval_kernel(k, -x), -right)
    assert np.all(right >= 0) or np.all(right <= 0)
    s = sample(k, 0.1, 5.0)
    np.testing.assert_array_equal(s, -s[::-1])


@pytest.mark.parametrize("k", [k for k in FAMILIES if k.family != "zero"], ids=str)
def test_jump_matches_richardson_limit(k):
    # 2 K(-h) is smooth in h on the left half-line; two Richardson levels
    h = 1e-3
    g = lambda s: 2 * eval_kernel(k, -s)  # noqa: E731
    r1 = 2 * g(h / 2) - g(h)
    r2 = 2 * g(h / 4) - g(h / 2)
    limit = (4 * r2 - r1) / 3
    assert limit == pytest.approx(facts(k).J, abs=1e-8)


def test_keller_segel_l1_by_truncated_quadrature():
    chi, d = 0.7, 2.0
    k = Kernel.keller_segel(chi, d)
    prev = None
    for L in (20.0, 40.0, 80.0):
        val = 2 * integrate.quad(lambda y: abs(eval_kernel(k, y)), 0, L, epsabs=1e-13, limit=200)[0]
        prev = val
    assert prev == pytest.approx(chi / math.sqrt(d), abs=1e-6)


def test_compact_bump_and_tabulated_facts_by_quadrature():
    bump = Kernel.compact_bump(0.5, 2.0)
    f = facts(bump)
    l1 = 2 * integrate.quad(lambda y: abs(eval_kernel(bump, y)), 0, 2)[0]
    m1 = 2 * integrate.quad(lambda y: y * abs(eval_kernel(bump, y)), 0, 2)[0]
    assert f.l1_norm == pytest.approx(l1, rel=1e-12)
    assert f.kbar_l1 == pytest.approx(m1, rel=1e-12)
    # a tabulated copy of the bump has the same facts
    y = np.linspace(0, 2, 201)
    tab = Kernel.tabulated(-0.25 * (1 - y / 2), 0.01, monotone="non-decreasing")
    tf = facts(tab)
    assert tf.J == pytest.approx(0.5)
    assert tf.l1_norm == pytest.approx(f.l1_norm, rel=1e-9)
    assert tf.kbar_l1 == pytest.approx(f.kbar_l1, rel=1e-9)


def test_constant_tail_tabulated_is_not_integrable():
    f = facts(Kernel.tabulated([0.5, 0.3, 0.2], 1.0, tail="constant"))
    assert math.isinf(f.l1_norm) and f.k_inf == 0.2 and f.J == -1.0


@pytest.mark.parametrize(
    "bad",
    [
        lambda: Kernel.keller_segel(0.0, 1.0),
        lambda: Kernel.keller_segel(1.0, -1.0),
        lambda: Kernel.power_law(1.0, 1.0),
        lambda: Kernel.power_law(1.0, 0.5, 2),
        lambda: Kernel.step(0.0),
        lambda: Kernel.compact_bump(0.5, 0.0),
        lambda: Kernel.tabulated([0.1, 0.3], 0.1),
        lambda: Kernel.tabulated([0.1, -0.1], 0.1),
        lambda: Kernel.tabulated([0.1], 0.1),
        lambda: Kernel.from_record({"family": "gaussian"}),
        lambda: Kernel.from_record({"family": "keller-segel", "params": {"chi": 1}}),
    ],
)
def test_structural_violations_rejected(bad):
    with pytest.raises(KernelError):
        bad()


@pytest.mark.parametrize("k", FAMILIES, ids=str)
def test_record_round_trip(k):
    assert Kernel.from_record(k.to_record()) == k


@given(
    chi=st.floats(0.01, 5.0),
    d=st.floats(0.01, 5.0),
    x=st.floats(0.001, 50.0),
    x2=st.floats(0.001, 50.0),
)
def test_keller_segel_monotone_on_half_line(chi, d, x, x2):
    k = Kernel.keller_segel(chi, d)
    a, b = sorted((x, x2))
    # non-positive and non-decreasing towards 0 from below on (0, inf)
    assert eval_kernel(k, a) <= eval_kernel(k, b) <= 0.0
