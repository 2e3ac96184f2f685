import json
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xjroute.errormodel import (
    ARCHITECTURES,
    ErrorModelParams,
    achievable_depth,
    all_to_all,
    architecture,
    epsilon_deco,
    epsilon_eff,
    epsilon_eff_superconducting,
    epsilon_eff_trapped_ion,
    even_ceil,
    qv_native,
    superconducting_grid,
    sweep,
    trapped_ion_analytic,
    trapped_ion_empirical,
)

# 40-digit evaluation of the N=32 worked case (mpmath), frozen
EPS_EFF_N32 = 0.001618210907002823434820268


def test_deco_values():
    assert epsilon_deco(0, 2.13) == 0
    assert epsilon_deco(5e-5, 1.0) == pytest.approx(4.99988e-5, rel=1e-6)
    assert epsilon_deco(2.0, 2.0) == pytest.approx(1 - math.exp(-1))
    assert epsilon_deco(2.0, 2.0) == pytest.approx(0.63212, abs=1e-5)
    with pytest.raises(ValueError):
        epsilon_deco(1.0, 0.0)


@given(st.floats(1e-12, 2e-4))
def test_deco_small_argument(x):
    # the relative gap to t/c is about x/2, so 0.01% holds up to x = 2e-4
    assert epsilon_deco(x, 1.0) == pytest.approx(x, rel=1e-4)


def test_eff_error_worked_case():
    assert epsilon_eff_trapped_ion(ErrorModelParams(), 32) == pytest.approx(EPS_EFF_N32, rel=1e-12)


def test_eff_error_reduces_to_gate_error():
    p = ErrorModelParams(epsilon_gate=3e-3, t_shuttle=0, x_loss=0, t_combine=0, t_separate=0)
    assert epsilon_eff_trapped_ion(p, 50) == 3e-3


def test_loss_term_is_linear():
    base = ErrorModelParams(x_loss=0)
    one = epsilon_eff_trapped_ion(ErrorModelParams(x_loss=1e-5), 32) - epsilon_eff_trapped_ion(base, 32)
    two = epsilon_eff_trapped_ion(ErrorModelParams(x_loss=2e-5), 32) - epsilon_eff_trapped_ion(base, 32)
    assert two == pytest.approx(2 * one, rel=1e-9)
    assert one == pytest.approx((0.4 * math.sqrt(32) + 2) * 1e-5, rel=1e-9)


@given(
    st.sampled_from(["epsilon_gate", "x_loss", "t_shuttle", "coherence_c"]),
    st.floats(0.01, 0.5),
    st.sampled_from([2, 8, 32, 200, 2048]),
)
def test_monotone_in_each_parameter(name, rel_step, n):
    p = ErrorModelParams()
    bigger = ErrorModelParams(**{**p.to_dict(), name: getattr(p, name) * (1 + rel_step)})
    before = epsilon_eff_trapped_ion(p, n)
    after = epsilon_eff_trapped_ion(bigger, n)
    if name == "coherence_c":
        assert after < before
    else:
        assert after > before


def test_depth_examples():
    assert achievable_depth(32, 1e-3) == pytest.approx(31.25, abs=1e-12)
    assert achievable_depth(2, 0.5) == 1.0
    assert achievable_depth(100, 1e-4) == pytest.approx(100.0)
    assert achievable_depth(10, 0.0) == math.inf


def test_all_to_all_fixed_point():
    res = qv_native(ErrorModelParams(epsilon_gate=1e-3), all_to_all())
    assert abs(res.sqrt_qv - 31.25) < 1e-12
    assert res.n == 32
    assert res.qv == pytest.approx(31.25**2)


def test_gate_error_one_gives_tiny_volume():
    res = qv_native(ErrorModelParams(epsilon_gate=1.0), all_to_all())
    assert res.qv <= 1


def test_superconducting_values():
    assert epsilon_eff_superconducting(1e-3, 4) == pytest.approx(1.01e-3)
    assert superconducting_grid().overhead(100) == pytest.approx(23.17)
    assert superconducting_grid().overhead(2) == 1.0
    assert epsilon_eff_superconducting(0.0, 64) == 0.0


@pytest.mark.parametrize("eps", [1e-2, 1e-3, 1e-4])
def test_architecture_ordering(eps):
    rows = {r["architecture"]: r["sqrt_qv"] for r in sweep([eps])}
    assert rows["all_to_all"] >= rows["trapped_ion"] >= rows["superconducting"]
    assert rows["trapped_ion_10c"] >= rows["trapped_ion"]


@given(st.floats(-4.5, -1.5))
@settings(max_examples=30)
def test_more_coherence_never_hurts(log_eps):
    p = ErrorModelParams(epsilon_gate=10**log_eps)
    for self_consistent in (False, True):
        a = qv_native(*architecture("trapped_ion", p), self_consistent=self_consistent)
        b = qv_native(*architecture("trapped_ion_10c", p), self_consistent=self_consistent)
        assert b.sqrt_qv >= a.sqrt_qv


@given(st.integers(0, 2**31))
@settings(max_examples=20)
def test_enumeration_order_does_not_matter(seed):
    ns = list(range(2, 400, 2))
    shuffled = ns[:]
    random.Random(seed).shuffle(shuffled)
    p = ErrorModelParams(epsilon_gate=2e-3)
    for name in ARCHITECTURES:
        assert qv_native(*architecture(name, p), ns) == qv_native(*architecture(name, p), shuffled)


def test_self_consistent_mode_keeps_valid_sizes():
    for eps in (1e-2, 3e-3, 1e-3, 3e-4, 1e-4):
        for name in ARCHITECTURES:
            res = qv_native(*architecture(name, ErrorModelParams(epsilon_gate=eps)), self_consistent=True)
            assert res.depth >= res.n or even_ceil(res.depth) == res.n


def test_even_ceil():
    assert [even_ceil(x) for x in (1.0, 2.0, 2.1, 3.0, 31.25)] == [2, 2, 4, 4, 32]


def test_empirical_model_interpolates_and_bounds_support():
    class R:
        def __init__(self, n, tau, passes):
            self.n, self.mean_tau, self.mean_junction_passes = n, tau, passes

    model = trapped_ion_empirical([R(8, 4.0, 2.0), R(32, 8.0, 3.0)])
    assert model.tau(8) == 4.0 and model.tau(32) == 8.0
    assert model.tau(18) == pytest.approx(6.0)  # sqrt 18 is halfway between sqrt 8 and sqrt 32
    p = ErrorModelParams()
    assert epsilon_eff(p, 8, model) < epsilon_eff(p, 32, model)
    with pytest.raises(ValueError):
        epsilon_eff(p, 64, model)
    assert qv_native(p, model).n <= 32


def test_empty_or_unsupported_range():
    with pytest.raises(ValueError):
        qv_native(ErrorModelParams(), all_to_all(), [])


@pytest.mark.parametrize(
    "bad", [{"epsilon_gate": -1}, {"epsilon_gate": 2}, {"x_loss": 1.5}, {"coherence_c": 0}]
)
def test_params_validation(bad):
    with pytest.raises(ValueError):
        ErrorModelParams(**bad)


def test_params_json(tmp_path):
    path = tmp_path / "p.json"
    path.write_text(json.dumps({"coherence_c": 21.3}))
    assert ErrorModelParams.from_json(path).coherence_c == 21.3
    path.write_text(json.dumps({"coherence": 21.3}))
    with pytest.raises(ValueError):
        ErrorModelParams.from_json(path)


def test_analytic_fits():
    model = trapped_ion_analytic()
    assert model.tau(100) == pytest.approx(15.0)
    assert model.x_count(100) == pytest.approx(6.0)
