"""Bound formula arithmetic: frozen constants, scaling laws, preconditions."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

import quasiband as qb


def mkenv(u, vp=None, vm=None):
    vp = dict(vp) if vp is not None else {k: 0.0 for k in u}
    vm = dict(vm) if vm is not None else {k: 0.0 for k in u}
    return qb.Envelopes(
        u=dict(u),
        v_plus=vp,
        v_minus=vm,
        delta_plus=max(vp.values(), default=0.0),
        delta_minus=max(vm.values(), default=0.0),
        time_grid=0,
        rigorous=True,
    )


def precondition(result, name):
    return next(c for c in result.preconditions if c.name == name)


def test_lp_power_norm():
    assert qb.lp_power_norm({1: -2.0, 2: 3.0}, 2.0) == 13.0
    assert qb.lp_power_norm({1: -2.0, 2: 3.0}, 1.0) == 5.0
    assert qb.lp_power_norm({}, 1.5) == 0.0
    with pytest.raises(ValueError, match="positive"):
        qb.lp_power_norm({1: 1.0}, 0.0)


def test_sup_norm():
    assert qb.sup_norm({1: -2.0, 2: 1.5}) == 2.0
    assert qb.sup_norm({}) == 0.0


def test_bargmann_norm_weights_by_site_index():
    assert qb.bargmann_norm({3: -0.5}) == 1.5
    assert qb.bargmann_norm({1: 1.0, 2: 1.0}) == 3.0
    assert qb.bargmann_norm({(3,): -0.5}) == 1.5
    assert qb.bargmann_norm({((3,), "a"): -0.5}) == 1.5
    with pytest.raises(ValueError, match="integer half-line"):
        qb.bargmann_norm({(1, 2): 1.0})
    with pytest.raises(ValueError, match=">= 1"):
        qb.bargmann_norm({0: 1.0})


def test_effective_potentials_arithmetic():
    # u=1, v_minus=2, coupling 24: the minus profile is 24*1 + 2 = 26
    env = mkenv({1: 1.0}, vm={1: 2.0})
    q = qb.effective_potentials(env, 24.0)
    assert q.minus == {1: 26.0}
    assert q.plus == {1: 24.0}
    assert q.coupling == 24.0


def test_gap_bound_coupling_constant():
    frame = qb.SpectralFrame(omega=6.0, s_plus=4.0)
    env = mkenv({1: 1.0})
    res = qb.bound_T1(frame, env, weighted=True)
    assert_allclose(res["minus"].inputs["coupling"], 24.0, rtol=1e-12)


def test_gap_bound_worked_chain():
    # omega 6, unit magnitude at site 1: profile 24, weighted norm 24,
    # value 27 * 9 * 24 = 5832
    frame = qb.SpectralFrame(omega=6.0, s_plus=4.0)
    env = mkenv({1: 1.0})
    res = qb.bound_T1(frame, env, weighted=True)
    assert_allclose(res["minus"].value, 5832.0, rtol=1e-12)
    assert res["minus"].ok
    assert res["minus"].window == frame.gap_minus().as_tuple()
    assert_allclose(res["total"].value, 2.0 * 5832.0, rtol=1e-12)


def test_gap_bound_zero_law():
    frame = qb.SpectralFrame(omega=6.0, s_plus=4.0)
    env = mkenv({1: 0.0})
    res = qb.bound_T1(frame, env, weighted=True)
    assert res["minus"].value == 0.0
    assert res["plus"].value == 0.0
    assert res["total"].value == 0.0


def test_gap_bound_no_gap_sentinel():
    frame = qb.SpectralFrame(omega=3.0, s_plus=4.0)
    res = qb.bound_T1(frame, mkenv({1: 1.0}), weighted=True)
    assert res["minus"].value == math.inf
    assert res["minus"].status == "preconditions-failed"
    assert not precondition(res["minus"], "gap_exists").satisfied
    # zero drive stays zero even without a gap
    zero = qb.bound_T1(frame, mkenv({}), weighted=True)
    assert zero["total"].value == 0.0


def test_gap_bound_cks_linearity_exact():
    frame = qb.SpectralFrame(omega=6.0, s_plus=4.0)
    env = mkenv({1: 1.0, 3: 0.4}, vm={1: 0.7, 3: 0.0})
    one = qb.bound_T1(frame, env, 1.0, 1.0, weighted=True)
    two = qb.bound_T1(frame, env, 2.0, 2.0, weighted=True)
    assert two["minus"].value == 2.0 * one["minus"].value
    assert two["plus"].value == 2.0 * one["plus"].value
    assert two["total"].value == 2.0 * one["total"].value


def test_strip_bound_values_and_window_echo():
    frame = qb.SpectralFrame(omega=8.0, s_plus=4.0)
    env = mkenv({1: 0.3}, vm={1: 0.2})
    res = qb.bound_T2(frame, env, coupling_c=10.0, weighted=True)
    # value is the plain weighted norm of the effective profile
    assert_allclose(res["minus"].value, 10.0 * 0.09 + 0.2, rtol=1e-12)
    assert res["minus"].window == (-0.2, 0.0)
    assert res["minus"].inputs["window_minus_literal"] == [0.2, 0.0]
    assert any("literal" in n for n in res["minus"].notes)
    assert res["plus"].window == (-4.0, 0.2 - 4.0)
    with pytest.raises(ValueError, match="coupling_c"):
        qb.bound_T2(frame, env, coupling_c=0.0)


def test_strip_bound_frequency_threshold_flips():
    # s_plus 4, envelope depth 0.5: threshold 4.5 + sqrt(4.25) = 6.56155...
    env = mkenv({1: 0.1}, vm={1: 0.5})
    lo = qb.bound_T2(qb.SpectralFrame(omega=6.5, s_plus=4.0), env, 10.0)
    hi = qb.bound_T2(qb.SpectralFrame(omega=6.6, s_plus=4.0), env, 10.0)
    name = "frequency_vs_envelope_minus"
    assert not precondition(lo["minus"], name).satisfied
    assert precondition(hi["minus"], name).satisfied
    assert precondition(hi["minus"], name).margin > 0.0


def test_strip_bound_frequency_zero_depth_reduces_to_gap():
    # zero envelope depth: the frequency condition is just omega >= s_plus
    env = mkenv({1: 0.1})
    at = qb.bound_T2(qb.SpectralFrame(omega=4.0, s_plus=4.0), env, 10.0)
    assert precondition(at["minus"], "frequency_vs_envelope_minus").satisfied
    below = qb.bound_T2(qb.SpectralFrame(omega=3.9, s_plus=4.0), env, 10.0)
    assert not precondition(
        below["minus"], "frequency_vs_envelope_minus"
    ).satisfied


def test_strip_bound_coupling_and_product_checks():
    env = mkenv({1: 0.3}, vm={1: 0.2}, vp={1: 0.1})
    frame = qb.SpectralFrame(omega=8.0, s_plus=4.0)
    # c s_gamma^2 = 160 > 32: large enough
    res = qb.bound_T2(frame, env, coupling_c=10.0)
    assert precondition(res["minus"], "coupling_large_enough").satisfied
    # delta_plus * c = 1 <= sqrt(3)
    assert precondition(
        res["minus"], "envelope_plus_times_coupling"
    ).satisfied
    weak = qb.bound_T2(frame, env, coupling_c=1.0)
    assert not precondition(weak["minus"], "coupling_large_enough").satisfied
    huge = qb.bound_T2(frame, env, coupling_c=20.0)
    assert not precondition(
        huge["minus"], "envelope_plus_times_coupling"
    ).satisfied  # 0.1 * 20 = 2 > sqrt(3)


def test_band_edge_constants_low_frequency():
    # omega 1.5 over spectrum top 4: rho 2, s_e 0.5, couplings 96 / 288,
    # edge prefactor 73
    frame = qb.SpectralFrame(omega=1.5, s_plus=4.0)
    assert frame.rho == 2
    assert_allclose(frame.s_e, 0.5, rtol=1e-12)
    env = mkenv({1: 1.0})
    res = qb.bound_T3(frame, env, cuboid=(1,), weighted=True)
    assert_allclose(res["band_minus"].inputs["coupling"], 96.0, rtol=1e-12)
    assert_allclose(res["edge"].inputs["coupling"], 288.0, rtol=1e-12)
    assert_allclose(res["edge"].inputs["prefactor"], 73.0, rtol=1e-12)
    assert res["edge"].ok
    assert res["band_minus"].window == frame.band_window().as_tuple()
    assert res["edge"].window == frame.edge_window().as_tuple()


def test_band_prefactor_at_gap_frequency():
    # omega 5 over spectrum top 4: rho 0, s_e 1, band prefactor 161
    frame = qb.SpectralFrame(omega=5.0, s_plus=4.0)
    env = mkenv({1: 1.0})
    res = qb.bound_T3(frame, env, cuboid=(1,), weighted=True)
    assert_allclose(res["band_minus"].inputs["prefactor"], 161.0, rtol=1e-12)


def test_edge_bound_not_applicable_without_folding():
    frame = qb.SpectralFrame(omega=5.0, s_plus=4.0)
    res = qb.bound_T3(frame, mkenv({1: 1.0}), cuboid=(1,), weighted=True)
    assert res["edge"].value is None
    assert res["edge"].status == "not-applicable"
    assert not precondition(res["edge"], "folded_edge_exists").satisfied
    assert not res["edge"].ok


def test_band_bound_requires_cuboid():
    frame = qb.SpectralFrame(omega=1.5, s_plus=4.0)
    with pytest.raises(ValueError, match="cuboid"):
        qb.bound_T3(frame, mkenv({1: 1.0}))
    with pytest.raises(ValueError, match="edge_coupling_rule"):
        qb.bound_T3(
            frame, mkenv({1: 1.0}), cuboid=(1,), edge_coupling_rule="x"
        )


def test_band_bound_emits_both_sign_branches():
    frame = qb.SpectralFrame(omega=1.5, s_plus=4.0)
    env = mkenv({1: 0.5}, vm={1: 1.0}, vp={1: 0.2})
    res = qb.bound_T3(frame, env, cuboid=(1,), weighted=True)
    assert res["band_minus"].bound_id == "T3.band.minus"
    assert res["band_plus"].bound_id == "T3.band.plus"
    # the asymmetric envelope separates the branches
    assert res["band_minus"].value > res["band_plus"].value
    assert "proven sign branch" in res["band_minus"].notes[0]


def test_band_edge_cks_linearity_exact():
    frame = qb.SpectralFrame(omega=1.5, s_plus=4.0)
    env = mkenv({1: 0.5, 2: 0.3}, vm={1: 1.0, 2: 0.0})
    one = qb.bound_T3(frame, env, 1.0, 1.0, cuboid=(2,), weighted=True)
    two = qb.bound_T3(frame, env, 2.0, 2.0, cuboid=(2,), weighted=True)
    assert two["band_minus"].value == 2.0 * one["band_minus"].value
    assert two["edge"].value == 2.0 * one["edge"].value


def test_frame_consistency_gap_regime():
    # without folding the edge width coincides with the gap width, and the
    # gap coupling equals the edge coupling formula evaluated at rho 0
    frame = qb.SpectralFrame(omega=6.0, s_plus=4.0)
    assert frame.rho == 0
    assert frame.s_e == frame.s_gamma
    res = qb.bound_T1(frame, mkenv({1: 1.0}), weighted=True)
    gap_coupling = res["minus"].inputs["coupling"]
    assert gap_coupling == 16.0 * frame.omega * (frame.rho + 1) / frame.s_e**2


def test_halfline_gap_variant_matches_generic_bitwise():
    frame = qb.SpectralFrame(omega=6.0, s_plus=4.0)
    env = mkenv({1: 1.0, 2: 0.4}, vm={1: 0.3, 2: 0.0}, vp={2: 0.1, 1: 0.0})
    base = qb.bound_T1(frame, env, 1.0, 1.0, p=1.0, weighted=True)
    hl = qb.bound_1d(frame, env, "cor42")
    for key in ("minus", "plus", "total"):
        assert hl[key].value == base[key].value
        assert hl[key].window == base[key].window
        assert hl[key].inputs == base[key].inputs
        assert hl[key].bound_id == f"cor42.{key}"


def test_halfline_worked_value():
    frame = qb.SpectralFrame(omega=6.0, s_plus=4.0)
    res = qb.bound_1d(frame, mkenv({1: 1.0}), "cor42")
    assert_allclose(res["minus"].value, 5832.0, rtol=1e-12)
    assert precondition(res["minus"], "half_line_spectrum_top").satisfied


def test_halfline_strip_variant_needs_coupling():
    frame = qb.SpectralFrame(omega=8.0, s_plus=4.0)
    with pytest.raises(ValueError, match="coupling_c"):
        qb.bound_1d(frame, mkenv({1: 1.0}), "cor43")
    res = qb.bound_1d(frame, mkenv({1: 1.0}), "cor43", coupling_c=10.0)
    assert res["minus"].bound_id == "cor43.minus"


def test_halfline_band_edge_coupling_rule():
    # the one-dimensional edge coupling is exactly four times the band one
    frame = qb.SpectralFrame(omega=1.5, s_plus=4.0)
    res = qb.bound_1d(frame, mkenv({1: 1.0}), "cor44", cuboid=(1,))
    band = res["band_minus"].inputs["coupling"]
    edge = res["edge"].inputs["coupling"]
    assert edge == 4.0 * band
    assert_allclose(band, 96.0, rtol=1e-12)
    assert_allclose(edge, 384.0, rtol=1e-12)
    assert res["edge"].bound_id == "cor44.edge"
    assert res["band_minus"].bound_id == "cor44.band.minus"


def test_halfline_edge_not_applicable_in_gap_regime():
    frame = qb.SpectralFrame(omega=6.0, s_plus=4.0)
    res = qb.bound_1d(frame, mkenv({1: 1.0}), "cor44", cuboid=(1,))
    assert res["edge"].value is None
    assert res["edge"].status == "not-applicable"


def test_halfline_spectrum_top_check():
    frame = qb.SpectralFrame(omega=6.0, s_plus=3.9)
    res = qb.bound_1d(frame, mkenv({1: 1.0}), "cor42")
    assert res["minus"].status == "preconditions-failed"
    assert not precondition(res["minus"], "half_line_spectrum_top").satisfied
    with pytest.raises(ValueError, match="variant"):
        qb.bound_1d(frame, mkenv({1: 1.0}), "cor99")


def test_bound_result_serialization():
    frame = qb.SpectralFrame(omega=6.0, s_plus=4.0)
    res = qb.bound_T1(frame, mkenv({1: 1.0}), weighted=True)
    d = res["minus"].to_dict()
    assert d["bound_id"] == "T1.minus"
    assert d["status"] == "ok"
    assert d["window"] == [-1.0, 0.0]
    assert isinstance(d["preconditions"], list)
    assert d["preconditions"][0]["name"] == "gap_exists"


@given(
    u1=st.floats(0.0, 2.0),
    v1=st.floats(0.0, 2.0),
    bump=st.floats(0.0, 1.0),
)
def test_gap_bound_envelope_monotonicity(u1, v1, bump):
    frame = qb.SpectralFrame(omega=6.0, s_plus=4.0)
    lo = qb.bound_T1(frame, mkenv({1: u1}, vm={1: v1}), weighted=True)
    hi = qb.bound_T1(
        frame, mkenv({1: u1 + bump}, vm={1: v1 + bump}), weighted=True
    )
    slack = 1e-12 * max(1.0, abs(hi["minus"].value))
    assert hi["minus"].value >= lo["minus"].value - slack
    assert hi["total"].value >= lo["total"].value - slack


@given(
    u1=st.floats(0.0, 2.0),
    v1=st.floats(0.0, 2.0),
    bump=st.floats(0.0, 1.0),
)
def test_band_edge_envelope_monotonicity(u1, v1, bump):
    frame = qb.SpectralFrame(omega=1.5, s_plus=4.0)
    lo = qb.bound_T3(
        frame, mkenv({1: u1}, vm={1: v1}), cuboid=(1,), weighted=True
    )
    hi = qb.bound_T3(
        frame, mkenv({1: u1 + bump}, vm={1: v1 + bump}),
        cuboid=(1,), weighted=True,
    )
    for key in ("band_minus", "edge"):
        slack = 1e-12 * max(1.0, abs(hi[key].value))
        assert hi[key].value >= lo[key].value - slack


@given(cks=st.floats(0.0, 8.0))
def test_strip_bound_cks_scales_linearly(cks):
    frame = qb.SpectralFrame(omega=8.0, s_plus=4.0)
    env = mkenv({1: 0.3, 2: 0.5}, vm={1: 0.2, 2: 0.0})
    base = qb.bound_T2(frame, env, 10.0, 1.0, 1.0, weighted=True)
    scaled = qb.bound_T2(frame, env, 10.0, cks, cks, weighted=True)
    assert_allclose(
        scaled["minus"].value, cks * base["minus"].value, rtol=1e-12
    )
