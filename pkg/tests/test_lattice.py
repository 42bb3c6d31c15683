import json

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

import quasiband as qb


def test_hypercubic_shapes():
    g = qb.build_hypercubic(1)
    assert g.nu == 1 and g.degree == (2,) and len(g.edges) == 1
    g3 = qb.build_hypercubic(3)
    assert g3.nu == 1 and g3.degree == (6,) and len(g3.edges) == 3


def test_hypercubic_rejects_bad_dim():
    with pytest.raises(ValueError):
        qb.build_hypercubic(0)
    with pytest.raises(ValueError):
        qb.build_hypercubic(5)


def test_fiber_z1_values(z1):
    assert_allclose(qb.fiber_matrix(z1, (0.0,)), [[0.0]], atol=1e-15)
    assert_allclose(qb.fiber_matrix(z1, (np.pi,)), [[4.0]], atol=1e-12)


def test_fiber_hermitian_exactly(honeycomb, z2):
    for g in (honeycomb, z2):
        for theta in [(0.1, 2.2), (3.0, 1.0), (5.5, 0.7)]:
            m = qb.fiber_matrix(g, theta)
            assert np.array_equal(m, m.conj().T)


def test_fiber_honeycomb_at_zero(honeycomb):
    ev = np.linalg.eigvalsh(qb.fiber_matrix(honeycomb, (0.0, 0.0)))
    assert_allclose(ev, [0.0, 6.0], atol=1e-12)


def test_fiber_z1_matches_ring_eigensolve(z1):
    # dense eigensolve of a 512-site periodic ring against the analytic fiber
    n = 512
    ring = (np.diag(np.full(n, 2.0)) - np.diag(np.ones(n - 1), 1)
            - np.diag(np.ones(n - 1), -1))
    ring[0, -1] = ring[-1, 0] = -1.0
    ring_ev = np.sort(np.linalg.eigvalsh(ring))
    thetas = 2.0 * np.pi * np.arange(n) / n
    fiber_ev = np.sort(
        [qb.fiber_matrix(z1, (t,))[0, 0].real for t in thetas]
    )
    assert_allclose(ring_ev, fiber_ev, atol=1e-10)


def test_kernel_at_theta_zero_with_zero_potential(honeycomb, z2, two_pendant):
    for g in (honeycomb, z2, two_pendant):
        m = qb.fiber_matrix(g, (0.0,) * g.dim)
        ones = np.ones(g.nu)
        assert_allclose(m @ ones, np.zeros(g.nu), atol=1e-12)


def test_band_structure_z1(z1):
    bs = qb.band_structure(z1, 128)
    lo, hi = bs.band_intervals[0]
    assert abs(lo) < 1e-9 and abs(hi - 4.0) < 1e-9
    assert abs(bs.s_top - 4.0) < 1e-9
    assert bs.flat == (False,)


def test_band_structure_sorted_rows(honeycomb):
    bs = qb.band_structure(honeycomb, 16)
    assert np.all(np.diff(bs.bands, axis=1) >= -1e-14)


def test_flat_band_two_pendants(two_pendant):
    bs = qb.band_structure(two_pendant, 64)
    assert any(bs.flat)
    flat_idx = bs.flat.index(True)
    lo, hi = bs.band_intervals[flat_idx]
    assert_allclose([lo, hi], [1.0, 1.0], atol=1e-12)


def test_single_pendant_not_flat():
    # one decoration disperses: both branches depend on quasimomentum
    g = qb.PeriodicGraph(
        dim=1, vertices=("c", "p"),
        edges=(("c", "c", (1,)), ("c", "p", (0,))),
    )
    bs = qb.band_structure(g, 64)
    assert not any(bs.flat)


def test_potential_shift_moves_intervals_exactly():
    g0 = qb.build_hypercubic(2)
    gc = qb.build_hypercubic(2, site_potential=0.75)
    b0 = qb.band_structure(g0, 32)
    bc = qb.band_structure(gc, 32)
    for (lo0, hi0), (loc, hic) in zip(b0.band_intervals, bc.band_intervals):
        assert abs(loc - lo0 - 0.75) < 1e-12
        assert abs(hic - hi0 - 0.75) < 1e-12


def test_grid_refinement_never_shrinks_intervals(z1, honeycomb, two_pendant):
    for g in (z1, honeycomb, two_pendant):
        coarse = qb.band_structure(g, 16)
        fine = qb.band_structure(g, 32)
        for (lc, hc), (lf, hf) in zip(coarse.band_intervals,
                                      fine.band_intervals):
            assert lf <= lc + 1e-6
            assert hf >= hc - 1e-6


def test_band_ceiling_bound(honeycomb, z3):
    # top of the spectrum never exceeds twice the max degree (zero potential)
    for g in (honeycomb, z3):
        bs = qb.band_structure(g, 16)
        assert bs.s_top <= 2.0 * g.max_degree + 1e-9


def test_top_regularity_z1(z1):
    bs = qb.band_structure(z1, 128)
    rep = qb.top_regularity_diagnostic(bs)
    assert rep.regular is True
    assert len(rep.maximizers) == 1
    (eigs,) = rep.neg_hessian_eigs
    assert_allclose(eigs, [2.0], atol=5e-3)


def test_top_regularity_z2(z2):
    bs = qb.band_structure(z2, 64)
    rep = qb.top_regularity_diagnostic(bs)
    assert rep.regular is True
    (eigs,) = rep.neg_hessian_eigs
    assert_allclose(sorted(eigs), [2.0, 2.0], atol=5e-3)


def test_top_regularity_flat_band_diagnostic(two_pendant):
    # a constant top band makes every grid point a maximizer; the diagnostic
    # must decline to certify instead of reporting a spurious Hessian
    base = qb.band_structure(two_pendant, 64)
    bands = np.array(base.bands)
    bands[:, -1] = 7.0
    bs = qb.BandStructure(
        graph=base.graph,
        grid=base.grid,
        bands=bands,
        band_intervals=base.band_intervals[:-1] + ((7.0, 7.0),),
        flat=base.flat[:-1] + (True,),
        s_top=7.0,
        argmax_theta=base.argmax_theta,
    )
    rep = qb.top_regularity_diagnostic(bs)
    assert rep.regular is None
    assert rep.diagnostic is not None


def test_connectivity_validation():
    with pytest.raises(ValueError):
        qb.PeriodicGraph(
            dim=1, vertices=("a", "b"),
            edges=(("a", "a", (1,)), ("b", "b", (1,))),  # two parallel chains
        )


def test_degree_validation():
    with pytest.raises(ValueError):
        qb.PeriodicGraph(dim=1, vertices=("a", "b"),
                         edges=(("a", "a", (1,)),))  # b isolated


def test_graph_json_roundtrip(tmp_path, honeycomb):
    path = tmp_path / "hc.json"
    qb.save_graph(honeycomb, path)
    loaded = qb.load_graph(path)
    assert loaded.dim == honeycomb.dim
    assert loaded.vertices == honeycomb.vertices
    assert set(loaded.edges) == set(honeycomb.edges)
    with open(path) as fh:
        payload = json.load(fh)
    assert set(payload) == {"dim", "vertices", "edges"}


@given(st.floats(-6.0, 6.0), st.floats(-6.0, 6.0))
def test_fiber_hermitian_property(t1, t2):
    g = qb.build_honeycomb()
    m = qb.fiber_matrix(g, (t1, t2))
    assert np.array_equal(m, m.conj().T)


@given(st.integers(1, 3), st.floats(-2.0, 2.0))
def test_hypercubic_fiber_closed_form(d, t):
    # single band 2d - 2*sum(cos theta_j) at theta = (t, t, ..., t)
    g = qb.build_hypercubic(d)
    m = qb.fiber_matrix(g, (t,) * d)
    expected = 2.0 * d - 2.0 * d * np.cos(t)
    assert abs(m[0, 0].real - expected) < 1e-12
