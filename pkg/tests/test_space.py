"""Space construction, balls, and geometric constant scans.

Oracles here are deliberately naive: pure-python triple loops and dense
radius sampling.  The library must agree with them exactly (constants) or
dominate them (envelopes over sampled radii versus exact enumeration).
"""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

from morreylab.catalog import (
    asymmetric_demo,
    calibrated_circle,
    catalog,
    get_space,
    line_grid,
    snowflake_grid,
    two_atom,
)
from morreylab.space import (
    SpaceError,
    ahlfors_fit,
    ball,
    ball_chain_check,
    build_space,
    center_radii,
    doubling_constant,
    doubling_witness,
    geometry_constants,
    load_space,
    nested_ball_bound_check,
    quasimetric_constants,
    quasimetric_witnesses,
    rep_balls,
    representative_radii,
    save_space,
    sharp_growth_constant,
)


# ---------------------------------------------------------------------------
# oracles


def oracle_triangle_constant(space):
    """Pure-python scan over all triples, including degenerate ones."""
    n = space.n
    D = space.dist
    best = 0.0
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            for k in range(n):
                denom = D[i][k] + D[k][j]
                if denom > 0:
                    best = max(best, D[i][j] / denom)
    return max(best, 1.0)


def oracle_symmetry_constant(space):
    n = space.n
    D = space.dist
    best = 1.0
    for i in range(n):
        for j in range(n):
            if i != j:
                best = max(best, D[i][j] / D[j][i])
    return best


def oracle_ball_measure(space, center, radius):
    total = 0.0
    for j in range(space.n):
        if space.dist[center][j] < radius:
            total += space.weights[j]
    return total


def oracle_doubling_dense(space, samples=4000):
    """Doubling ratio maximized over a dense grid of radii; lower bound only."""
    d_X = space.diameter
    best = 1.0
    for x in range(space.n):
        for r in np.linspace(d_X / samples, d_X * (1 - 1e-12), samples):
            small = oracle_ball_measure(space, x, r)
            big = oracle_ball_measure(space, x, 2 * r)
            if small > 0:
                best = max(best, big / small)
    return best


# ---------------------------------------------------------------------------
# construction and validation


def test_build_space_basic():
    s = line_grid(4)
    assert s.n == 4
    assert s.diameter == 1.0
    assert abs(s.total_measure - 1.0) < 1e-15
    assert s.coords is not None


def test_build_space_single_point():
    s = build_space([0.0], {"kind": "euclidean"}, [2.5])
    assert s.n == 1
    assert s.diameter == 0.0
    assert doubling_constant(s) == 1.0


def test_build_space_rejects_bad_weights():
    with pytest.raises(SpaceError):
        build_space([0.0, 1.0], {"kind": "euclidean"}, [1.0, 0.0])
    with pytest.raises(SpaceError):
        build_space([0.0, 1.0], {"kind": "euclidean"}, [1.0, -1.0])
    with pytest.raises(SpaceError):
        build_space([0.0, 1.0], {"kind": "euclidean"}, [1.0])


def test_build_space_rejects_bad_matrix():
    with pytest.raises(SpaceError):
        build_space(["a", "b"], {"kind": "matrix", "matrix": [[0, 1], [1, 1]]}, [1, 1])
    with pytest.raises(SpaceError):
        build_space(["a", "b"], {"kind": "matrix", "matrix": [[0, 0], [0, 0]]}, [1, 1])
    with pytest.raises(SpaceError):
        build_space(["a", "b"], {"kind": "matrix", "matrix": [[0, -1], [1, 0]]}, [1, 1])


def test_build_space_rejects_empty():
    with pytest.raises(SpaceError):
        build_space([], {"kind": "euclidean"}, [])


def test_save_load_round_trip(tmp_path):
    for name in catalog():
        s = get_space(name)
        p = tmp_path / f"{name}.json"
        save_space(s, p)
        s2 = load_space(p)
        assert np.array_equal(s.dist, s2.dist)
        assert np.array_equal(s.weights, s2.weights)
        assert s.space_id() == s2.space_id()


def test_space_id_distinguishes(tmp_path):
    assert line_grid(4).space_id() != line_grid(16).space_id()
    assert load_space.__name__ == "load_space"
    with pytest.raises(SpaceError):
        p = tmp_path / "bad.json"
        p.write_text(json.dumps({"format": "other"}))
        load_space(p)


# ---------------------------------------------------------------------------
# balls


def test_ball_strict_inequality_frozen():
    s = line_grid(4)
    b = ball(s, 0, 0.5)
    assert b.members == (0, 1)
    assert abs(b.measure - 0.5) < 1e-15
    b2 = ball(s, 1, 0.999)
    assert b2.members == (0, 1, 2, 3)
    assert abs(b2.measure - 1.0) < 1e-15


def test_ball_matches_oracle_random():
    rng = np.random.default_rng(7)
    s = line_grid(16)
    for _ in range(200):
        x = int(rng.integers(0, s.n))
        r = float(rng.uniform(1e-6, 1.5))
        assert abs(ball(s, x, r).measure - oracle_ball_measure(s, x, r)) < 1e-14


def test_ball_rejects_bad_args():
    s = line_grid(4)
    with pytest.raises(SpaceError):
        ball(s, 9, 0.5)
    with pytest.raises(SpaceError):
        ball(s, 0, 0.0)


def test_representative_radii_cover_every_interval():
    ts = np.array([0.25, 0.5, 0.75])
    reps = representative_radii(ts, 1.0)
    assert len(reps) == 4
    assert np.allclose(reps, [0.125, 0.375, 0.625, 0.875])
    closed = representative_radii(ts, 1.0, closed=True)
    assert len(closed) == 5
    assert closed[-1] > 1.0


def test_representative_radii_unbounded():
    reps = representative_radii(np.array([1.0, 2.0]), None)
    assert reps[-1] == 3.0
    assert len(reps) == 3


def test_rep_balls_enumerate_all_member_sets():
    s = line_grid(4)
    table = rep_balls(s)
    # every distinct ball at any real radius in (0, d_X) must appear
    seen = {tuple(m) for m in table.masks}
    rng = np.random.default_rng(3)
    for _ in range(500):
        x = int(rng.integers(0, 4))
        r = float(rng.uniform(1e-9, s.diameter * (1 - 1e-12)))
        mask = tuple(s.dist[x] < r)
        assert mask in seen
    assert np.allclose(table.measures, table.masks @ s.weights)


def test_rep_balls_dilation_thresholds():
    s = line_grid(4)
    table = rep_balls(s, dilation=3.0)
    # union thresholds make both the ball and its dilate exact per row
    for i in range(table.size):
        x, r = int(table.centers[i]), float(table.radii[i])
        assert abs(table.measures[i] - oracle_ball_measure(s, x, r)) < 1e-14
        assert abs(table.dilated_measures[i] - oracle_ball_measure(s, x, 3.0 * r)) < 1e-14


def test_rep_balls_dedupe_preserves_value_set():
    s = line_grid(16)
    full = rep_balls(s)
    small = rep_balls(s, dedupe=True)
    assert small.size < full.size
    full_keys = {(full.masks[i].tobytes(), full.measures[i]) for i in range(full.size)}
    small_keys = {(small.masks[i].tobytes(), small.measures[i]) for i in range(small.size)}
    assert small_keys == full_keys


def test_center_radii_closed_includes_diameter():
    s = line_grid(4)
    rs = center_radii(s, 0, closed=True)
    assert rs[-1] > s.diameter
    mask = s.dist[0] < rs[-1]
    assert mask.all()


# ---------------------------------------------------------------------------
# quasimetric constants


def test_metric_space_constants_are_one():
    # distance quantization can lift the triangle ratio on a true metric by
    # about one quantum relative to the shortest side of a tight triangle
    for name in ("grid-4", "grid-16", "snowflake-16", "circle-16", "two-atom"):
        s = get_space(name)
        C_t, C_s = quasimetric_constants(s)
        assert abs(C_t - 1.0) < 1e-10
        assert C_s == 1.0


def test_squared_distance_triangle_constant_frozen():
    # d = |x - y|^2 on {0, 1/2, 1}: d(0,1) = 1, d(0,1/2) + d(1/2,1) = 1/2
    s = build_space([0.0, 0.5, 1.0], {"kind": "snowflake", "exponent": 2.0}, [1, 1, 1])
    C_t, C_s = quasimetric_constants(s)
    assert abs(C_t - 2.0) < 1e-14
    assert C_s == 1.0
    w = quasimetric_witnesses(s)
    i, j, k = w["triple"]
    assert {i, j} == {0, 2} and k == 1


def test_constants_match_oracle_random_matrices():
    rng = np.random.default_rng(11)
    for _ in range(10):
        n = int(rng.integers(3, 7))
        mat = rng.uniform(0.5, 3.0, size=(n, n))
        np.fill_diagonal(mat, 0.0)
        s = build_space(list(range(n)), {"kind": "matrix", "matrix": mat.tolist()},
                        rng.uniform(0.5, 2.0, size=n).tolist())
        C_t, C_s = quasimetric_constants(s)
        assert abs(C_t - oracle_triangle_constant(s)) < 1e-12
        assert abs(C_s - oracle_symmetry_constant(s)) < 1e-12


def test_asymmetric_demo_constants():
    s = asymmetric_demo()
    C_t, C_s = quasimetric_constants(s)
    assert C_s >= 2.0
    assert C_t >= 1.0
    w = quasimetric_witnesses(s)
    i, j = w["pair"]
    assert abs(s.dist[i][j] / s.dist[j][i] - C_s) < 1e-12
    i, j, k = w["triple"]
    assert abs(s.dist[i][j] / (s.dist[i][k] + s.dist[k][j]) - C_t) < 1e-12


def test_derived_constants_formulas():
    s = asymmetric_demo()
    g = geometry_constants(s)
    assert abs(g.N_0 - g.C_t * (1 + 2 * g.C_s)) < 1e-14
    assert abs(g.a_bar - g.C_t * (g.C_t * (g.C_s + 1) + 1)) < 1e-14


# ---------------------------------------------------------------------------
# doubling


def test_two_atom_doubling_frozen():
    # center at the light atom, r just above gap/2: B(x,r) = {x} has mass 1,
    # B(x,2r) has mass 11
    s = two_atom()
    assert abs(doubling_constant(s) - 11.0) < 1e-14
    x, r = doubling_witness(s)
    assert x == 0
    assert 0.5 < r < 1.0


def test_doubling_dominates_dense_sampling():
    for name in ("grid-4", "grid-16", "circle-16", "snowflake-16", "asym-4"):
        s = get_space(name)
        exact = doubling_constant(s)
        sampled = oracle_doubling_dense(s, samples=600)
        assert exact >= sampled - 1e-12
        # dense sampling should come close on these small spaces
        assert sampled >= exact * 0.999 or exact - sampled < 0.5


def test_doubling_at_least_one():
    for name in catalog():
        assert doubling_constant(get_space(name)) >= 1.0


# ---------------------------------------------------------------------------
# volume regularity


def test_calibrated_circle_measure_equals_radius():
    # for n = 65 the step 1/65 is not binary-representable, so distance
    # quantization moves the representative radii by about one quantum
    for n in (16, 64, 65):
        s = calibrated_circle(n)
        table = rep_balls(s)
        assert np.allclose(table.measures, table.radii, rtol=0, atol=1e-12)


def test_calibrated_circle_geometry():
    s = calibrated_circle(64)
    C_t, C_s = quasimetric_constants(s)
    assert abs(C_t - 1.0) < 1e-12 and C_s == 1.0
    fit = ahlfors_fit(s, alpha=1.0, beta=1.0)
    assert abs(fit.c_low - 1.0) < 1e-12
    assert abs(fit.c_up - 1.0) < 1e-12
    assert abs(fit.b_growth - 1.0) < 1e-12
    assert abs(sharp_growth_constant(s) - 1.5) < 1e-12


def test_grid_upper_envelope_near_two():
    # uniform grid on [0,1]: mu B(x, r) <= c_up r with c_up about 2 + O(1/n)
    for n in (16, 64):
        s = line_grid(n)
        fit = ahlfors_fit(s, alpha=1.0, beta=1.0, window=(2.0 / n, 1.0))
        assert 1.8 < fit.c_up < 2.3
        assert fit.c_low > 0


def test_ahlfors_fit_zero_window_reports_infinite_upper():
    s = line_grid(4)
    fit = ahlfors_fit(s, alpha=1.0, beta=1.0, window=(0.0, 1.0))
    assert math.isinf(fit.c_up)
    assert fit.upper_fails_at_zero


def test_ahlfors_fit_rejects_empty_window():
    s = line_grid(4)
    with pytest.raises(SpaceError):
        ahlfors_fit(s, window=(0.5, 0.5))
    with pytest.raises(SpaceError):
        ahlfors_fit(s, window=(-1.0, 1.0))


def test_ahlfors_fitted_slope_near_one_on_grid():
    fit = ahlfors_fit(line_grid(64))
    assert 0.8 < fit.alpha_lower < 1.2
    assert fit.fitted


def test_ahlfors_envelopes_are_valid_bounds_at_representatives():
    # the envelope convention certifies the inequality at representative radii
    for name in ("grid-16", "circle-16", "snowflake-16"):
        s = get_space(name)
        fit = ahlfors_fit(s, alpha=1.0, beta=1.0)
        lo, hi = fit.window
        table = rep_balls(s)
        in_window = (table.radii >= lo) & (table.radii <= hi)
        r = table.radii[in_window]
        mu = table.measures[in_window]
        pos = mu > 0
        assert np.all(mu[pos] >= fit.c_low * r[pos] - 1e-12)
        assert np.all(mu <= fit.c_up * r + 1e-12)
        assert np.all(mu <= fit.b_growth * r + 1e-12)


def test_sharp_growth_dominates_all_real_radii_past_first_jump():
    # below the first jump the ball is the bare atom and no linear bound holds
    rng = np.random.default_rng(9)
    for name in ("grid-16", "circle-16", "two-atom", "asym-4"):
        s = get_space(name)
        b = sharp_growth_constant(s)
        for _ in range(400):
            x = int(rng.integers(0, s.n))
            d = s.dist[x]
            first = d[d > 0].min()
            r = float(rng.uniform(first * (1 + 1e-12), 2.0 * s.diameter))
            assert oracle_ball_measure(s, x, r) <= b * r + 1e-12


def test_sharp_growth_calibrated_circle_value():
    # first jump at h with mass 3h/2 inside gives exactly 3/2
    s = calibrated_circle(16)
    assert abs(sharp_growth_constant(s) - 1.5) < 1e-13


# ---------------------------------------------------------------------------
# structural ball lemmas


def test_ball_chain_inclusion_everywhere():
    for name in catalog():
        s = get_space(name)
        rep = ball_chain_check(s)
        assert rep.passed, f"{name}: {rep.witness}"
        assert rep.failures == 0


def test_nested_ball_bound_same_center_theorem():
    # restricting to same-center pairs this is a consequence of doubling
    for name in ("grid-4", "grid-16", "circle-16", "two-atom"):
        s = get_space(name)
        rep = nested_ball_bound_check(s)
        assert rep.pairs_checked > 0
        if not rep.passed:
            # cross-center witnesses are allowed to fail the continuum bound,
            # but same-center ones never may
            assert rep.witness["inner"][0] != rep.witness["outer"][0]


def test_nested_ball_bound_passes_on_shipped_spaces():
    for name in ("grid-16", "circle-16", "two-atom", "snowflake-16"):
        rep = nested_ball_bound_check(get_space(name))
        assert rep.passed, f"{name}: worst {rep.worst_ratio} at {rep.witness}"
