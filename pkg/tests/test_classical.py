import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kickedtop import (
    DEFAULT_TANGENT,
    KickParams,
    SphereAngles,
    TangentVector,
    UnitSpinVector,
    angles_to_vector,
    benettin_exponent,
    classical_step,
    classify_grid,
    ks_entropy,
    lambda_cut_from_histogram,
    lyapunov_exponent,
    lyapunov_grid,
    poincare_section,
    tangent_step,
    vector_to_angles,
)
from kickedtop.classical import make_rng, random_sphere_states, step_arrays, step_tangent_arrays

ALPHA = 11.0 * math.pi / 19.0


def _unit(x, y, z):
    n = math.sqrt(x * x + y * y + z * z)
    return UnitSpinVector(x / n, y / n, z / n)


class TestClassicalStep:
    def test_pure_precession_quarter_turn(self):
        out = classical_step(UnitSpinVector(0, 0, 1), KickParams(math.pi / 2, 0.0))
        assert np.allclose([out.x, out.y, out.z], [0.0, -1.0, 0.0], atol=1e-12)

    def test_identity_case(self):
        v = _unit(0.3, -0.5, 0.8)
        out = classical_step(v, KickParams(0.0, 0.0))
        assert np.allclose([out.x, out.y, out.z], [v.x, v.y, v.z], atol=1e-15)

    def test_x_axis_is_fixed_for_any_kick(self):
        # precession axis point; the torsion angle vanishes there too
        out = classical_step(UnitSpinVector(1, 0, 0), KickParams(ALPHA, 2.0))
        assert np.allclose([out.x, out.y, out.z], [1.0, 0.0, 0.0], atol=1e-15)

    def test_generic_point_against_high_precision_value(self):
        # frozen from a 50-digit evaluation of the one-kick matrix
        out = classical_step(UnitSpinVector(0.6, 0.64, 0.48), KickParams(ALPHA, 2.0))
        expected = [0.84704986951104109, 0.17296447494851604, 0.50258313637358788]
        assert np.allclose([out.x, out.y, out.z], expected, atol=1e-15)

    def test_two_kicks_against_high_precision_value(self):
        p = KickParams(ALPHA, 2.6)
        out = classical_step(classical_step(UnitSpinVector(0, 0, 1), p), p)
        expected = [0.55170639669631034, 0.46187831062782353, -0.69446992592621403]
        assert np.allclose([out.x, out.y, out.z], expected, atol=1e-15)

    def test_norm_preserved_over_many_random_params(self):
        rng = make_rng(42)
        for _ in range(200):
            params = KickParams(rng.uniform(-4, 4), rng.uniform(0, 10))
            xyz = random_sphere_states(500, rng)
            out = step_arrays(xyz, params)
            norms = np.sqrt((out**2).sum(axis=0))
            assert np.max(np.abs(norms - 1.0)) < 1e-12

    def test_zero_kick_composition_is_single_rotation(self):
        # n precessions about x equal one rotation by n*alpha
        n, alpha = 137, 0.8137
        v = _unit(0.2, 0.9, -0.3)
        cur = v
        for _ in range(n):
            cur = classical_step(cur, KickParams(alpha, 0.0))
        c, s = math.cos(n * alpha), math.sin(n * alpha)
        expected = [v.x, c * v.y - s * v.z, s * v.y + c * v.z]
        assert np.allclose([cur.x, cur.y, cur.z], expected, atol=1e-10)


class TestAngles:
    def test_equator_points(self):
        v = angles_to_vector(SphereAngles(0.0, math.pi / 2))
        assert np.allclose([v.x, v.y, v.z], [1, 0, 0], atol=1e-15)
        v = angles_to_vector(SphereAngles(math.pi / 2, math.pi / 2))
        assert np.allclose([v.x, v.y, v.z], [0, 1, 0], atol=1e-15)

    def test_round_trip_example(self):
        a = vector_to_angles(angles_to_vector(SphereAngles(0.3, 1.1)))
        assert abs(a.phi - 0.3) < 1e-12 and abs(a.theta - 1.1) < 1e-12

    @given(
        st.floats(-math.pi, math.pi, exclude_max=True),
        st.floats(1e-6, math.pi - 1e-6),
    )
    def test_round_trip_property(self, phi, theta):
        a = vector_to_angles(angles_to_vector(SphereAngles(phi, theta)))
        assert abs(a.phi - phi) < 1e-9
        assert abs(a.theta - theta) < 1e-9

    def test_poles_use_zero_phi_convention(self):
        assert vector_to_angles(UnitSpinVector(0, 0, 1)).phi == 0.0
        assert vector_to_angles(UnitSpinVector(0, 0, -1)).phi == 0.0
        assert vector_to_angles(UnitSpinVector(0, 0, -1)).theta == pytest.approx(math.pi)


class TestTangentStep:
    def test_zero_kick_is_isometry(self):
        v = _unit(0.1, -0.7, 0.7)
        d = TangentVector(0.3, 0.4, -0.5)
        out = tangent_step(v, d, KickParams(1.234, 0.0))
        assert abs(np.linalg.norm(out.as_array()) - np.linalg.norm(d.as_array())) < 1e-14

    def test_zero_delta_maps_to_zero(self):
        out = tangent_step(_unit(1, 2, 3), TangentVector(0, 0, 0), KickParams(ALPHA, 2.6))
        assert out.dx == out.dy == out.dz == 0.0

    def test_matches_finite_differences(self):
        # central differences of the map with step 1e-6, 1000 random samples
        rng = make_rng(7)
        params = KickParams(ALPHA, 2.6)
        eps = 1e-6
        xyz = random_sphere_states(1000, rng)
        deltas = rng.normal(size=(3, 1000))
        deltas /= np.sqrt((deltas**2).sum(axis=0))
        _, analytic = step_tangent_arrays(xyz, deltas, params)
        fd = (step_arrays(xyz + eps * deltas, params) - step_arrays(xyz - eps * deltas, params)) / (2 * eps)
        rel = np.sqrt(((analytic - fd) ** 2).sum(axis=0)) / np.sqrt((analytic**2).sum(axis=0))
        assert np.max(rel) < 1e-5


class TestLyapunov:
    def test_synthetic_linear_map_recovers_log_two(self):
        jac = np.diag([2.0, 0.5, 1.0])

        def advance(state, delta):
            return state, jac @ delta

        lam = benettin_exponent(advance, np.zeros(3), np.array([1.0, 1.0, 1.0]), 500)
        assert abs(lam - math.log(2.0)) < 1e-10

    def test_regular_regime_is_tiny(self):
        lam = lyapunov_exponent(_unit(0.2, 0.5, 0.6), KickParams(ALPHA, 0.2), 10_000)
        assert lam < 1e-2

    def test_chaotic_regime_mostly_positive(self):
        rng = make_rng(5)
        xyz = random_sphere_states(100, rng)
        from kickedtop.classical import benettin_many

        d = np.tile(np.array(DEFAULT_TANGENT)[:, None], (1, 100))
        lam = benettin_many(xyz, d, KickParams(ALPHA, 6.0), 10_000)
        assert np.mean(lam > 0) >= 0.95

    def test_scalar_matches_vectorized(self):
        v = _unit(0.3, -0.2, 0.8)
        from kickedtop.classical import benettin_many

        lam_vec = benettin_many(
            v.as_array()[:, None],
            np.array(DEFAULT_TANGENT)[:, None],
            KickParams(ALPHA, 3.0),
            200,
        )[0]
        lam_scalar = lyapunov_exponent(v, KickParams(ALPHA, 3.0), 200)
        assert lam_scalar == lam_vec

    def test_tangent_direction_does_not_matter_in_chaos(self):
        v = _unit(0.4, 0.5, -0.6)
        p = KickParams(ALPHA, 6.0)
        l1 = lyapunov_exponent(v, p, 10_000, delta0=(1.0, 0.0, 0.0))
        l2 = lyapunov_exponent(v, p, 10_000, delta0=(0.0, 0.6, 0.8))
        assert abs(l1 - l2) < 1e-2


class TestLyapunovGrid:
    def test_regular_grid_is_near_zero(self):
        g = lyapunov_grid(KickParams(ALPHA, 0.2), 50, 50, 2000)
        assert g.values.max() < 1e-2

    def test_chaotic_sea_floor(self):
        # at gamma=6 a handful of cells straddle tiny surviving islands;
        # everything else sits far above 0.1 (observed at 300x300, 1e4 kicks:
        # below-0.1 fraction ~0.2%, sea bulk ~0.9 per kick)
        g = lyapunov_grid(KickParams(ALPHA, 6.0), 50, 50, 2000)
        assert np.quantile(g.values, 0.01) > 0.1
        assert np.mean(g.values > 0.1) > 0.99
        assert g.values.max() > 0.85

    def test_degenerate_two_by_two(self):
        g = lyapunov_grid(KickParams(ALPHA, 2.0), 2, 2, 50)
        assert g.values.shape == (2, 2)
        assert np.isfinite(g.values).all()

    def test_finite_time_floor(self):
        # finite-time estimates may dip below zero, but only by O(1/n_kicks)
        g = lyapunov_grid(KickParams(ALPHA, 2.0), 40, 40, 2000)
        assert g.values.min() >= -g.noise_floor


class TestKsEntropy:
    def test_uniform_grid_integrates_exactly(self):
        g = lyapunov_grid(KickParams(ALPHA, 0.0), 24, 24, 10)
        const = 0.37
        g = type(g)(g.grid, np.full_like(g.values, const), g.params, g.n_kicks)
        for geometry in ("area", "angle"):
            gg = lyapunov_grid(KickParams(ALPHA, 0.0), 24, 24, 10, geometry)
            gg = type(gg)(gg.grid, np.full_like(gg.values, const), gg.params, gg.n_kicks)
            total = gg.grid.cell_area.sum() * gg.grid.n_phi / (4 * math.pi)
            assert abs(ks_entropy(gg) - const * total) < 1e-10
            # the area geometry tiles the sphere exactly
            if geometry == "area":
                assert abs(ks_entropy(gg) - const) < 1e-10

    def test_zero_grid_gives_zero(self):
        g = lyapunov_grid(KickParams(ALPHA, 2.0), 10, 10, 20)
        g = type(g)(g.grid, np.zeros_like(g.values), g.params, g.n_kicks)
        assert ks_entropy(g) == 0.0

    def test_below_transition_is_small(self):
        g = lyapunov_grid(KickParams(ALPHA, 2.0), 50, 50, 2000)
        assert ks_entropy(g) < 1e-2


class TestClassification:
    def test_infinite_cut_marks_all_regular(self):
        g = lyapunov_grid(KickParams(ALPHA, 6.0), 10, 10, 100)
        c = classify_grid(g, math.inf)
        assert (c.c == -1).all()
        assert c.chaotic_fraction == 0.0

    def test_zero_cut_with_positive_grid_marks_all_chaotic(self):
        g = lyapunov_grid(KickParams(ALPHA, 6.0), 10, 10, 100)
        g = type(g)(g.grid, np.abs(g.values) + 0.1, g.params, g.n_kicks)
        c = classify_grid(g, 0.0)
        assert (c.c == 1).all()
        assert c.chaotic_fraction == 1.0

    def test_negative_cut_rejected(self):
        g = lyapunov_grid(KickParams(ALPHA, 2.0), 4, 4, 10)
        with pytest.raises(ValueError):
            classify_grid(g, -0.5)

    def test_mixed_regime_valley_rule(self):
        # regression anchor from the 300x300, 1e4-kick run at gamma=2.6:
        # lambda_cut ~ 0.020, chaotic fraction ~ 0.693
        g = lyapunov_grid(KickParams(ALPHA, 2.6), 60, 60, 4000, geometry="angle")
        cut, rule = lambda_cut_from_histogram(g)
        assert rule == "valley"
        assert 0.005 < cut < 0.1
        c = classify_grid(g, cut)
        assert 0.6 < c.chaotic_fraction < 0.78

    def test_unimodal_falls_back_to_floor(self):
        g = lyapunov_grid(KickParams(ALPHA, 0.2), 30, 30, 2000)
        cut, rule = lambda_cut_from_histogram(g)
        assert rule == "floor"
        assert cut == pytest.approx(math.log(2000) / 2000)


class TestPoincare:
    def test_zero_kicks_returns_initial_point_only(self):
        pts = poincare_section(KickParams(ALPHA, 2.0), 1, 0, seed=1)
        assert pts.shape == (1, 1, 2)

    def test_point_count(self):
        pts = poincare_section(KickParams(ALPHA, 2.0), 225, 400, seed=1)
        assert pts.shape == (225, 401, 2)

    def test_deterministic_for_fixed_seed(self):
        a = poincare_section(KickParams(ALPHA, 4.0), 10, 50, seed=9)
        b = poincare_section(KickParams(ALPHA, 4.0), 10, 50, seed=9)
        assert np.array_equal(a, b)

    def test_regular_orbits_trace_thin_curves(self):
        # near-integrable orbits are warped rings: the third singular value
        # of the centered 3-d point cloud stays far below the leading one
        pts = poincare_section(KickParams(ALPHA, 0.2), 20, 400, seed=3)
        for orbit in range(pts.shape[0]):
            phi, theta = pts[orbit, :, 0], pts[orbit, :, 1]
            xyz = np.stack(
                [np.cos(phi) * np.sin(theta), np.sin(phi) * np.sin(theta), np.cos(theta)]
            ).T
            sv = np.linalg.svd(xyz - xyz.mean(axis=0), compute_uv=False)
            assert sv[2] / sv[0] < 0.15

    def test_chaotic_orbit_is_not_a_curve(self):
        pts = poincare_section(KickParams(ALPHA, 6.0), 1, 2000, seed=3)
        phi, theta = pts[0, :, 0], pts[0, :, 1]
        xyz = np.stack(
            [np.cos(phi) * np.sin(theta), np.sin(phi) * np.sin(theta), np.cos(theta)]
        ).T
        sv = np.linalg.svd(xyz - xyz.mean(axis=0), compute_uv=False)
        assert sv[2] / sv[0] > 0.5


@given(st.floats(-10, 10), st.floats(0, 20))
@settings(max_examples=50)
def test_single_step_norm_property(alpha, gamma):
    out = classical_step(_unit(0.26726, 0.53452, 0.80178), KickParams(alpha, gamma))
    assert abs(out.x**2 + out.y**2 + out.z**2 - 1.0) < 1e-12


def test_kick_params_validation():
    with pytest.raises(ValueError):
        KickParams(math.inf, 1.0)
    with pytest.raises(ValueError):
        KickParams(1.0, -0.5)
    with pytest.raises(ValueError):
        UnitSpinVector(1.0, 1.0, 1.0)
