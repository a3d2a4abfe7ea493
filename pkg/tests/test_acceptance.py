"""Acceptance suite: one test per shipped criterion.

Each test prints a single pass/fail line with the measured budget so a
verbose run reads as a checklist.  Tolerances and time budgets are the
shipped ones; nothing here is loosened to accommodate the implementation.
"""

from __future__ import annotations

import time

import numpy as np

from morreylab.catalog import catalog, get_space
from morreylab.certify import generate_family, verify_dominance, \
    verify_hedberg, verify_reduction, verify_weak_type
from morreylab.cli import main
from morreylab.norms import (grand_lebesgue_norm, grand_morrey_norm,
                             inner_seminorm_matrix, lebesgue_norm,
                             morrey_norm)
from morreylab.operators import maximal, modified_maximal
from morreylab.scales import (MorreyVariant, aux_eval, grid_for,
                              invert_phi_bar, make_grand_params,
                              make_potential_setup, riesz_corollary_setup,
                              sobolev_exponent)
from morreylab.space import (ball_chain_check, nested_ball_bound_check,
                             quasimetric_constants, sharp_growth_constant)


def _report(num, ok, detail):
    status = "PASS" if ok else "FAIL"
    print(f"[criterion {num}] {status}: {detail}")
    assert ok, f"criterion {num} failed: {detail}"


def test_criterion_1_geometry_suite():
    t0 = time.perf_counter()
    names = ["grid-4", "grid-16", "grid-64", "snowflake-16", "two-atom"]
    worst_slack = 0.0
    for name in names:
        s = get_space(name)
        C_t, C_s = quasimetric_constants(s)
        d = s.dist
        den = d[:, :, None] + d[None, :, :]
        num = np.broadcast_to(d[:, None, :], den.shape)
        with np.errstate(divide="ignore", invalid="ignore"):
            tri = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
        want_t = max(1.0, float(tri.max()))
        with np.errstate(divide="ignore", invalid="ignore"):
            sym = np.where(d.T > 0, d / np.where(d.T > 0, d.T, 1.0), 1.0)
        want_s = max(1.0, float(sym.max()))
        slack = max(abs(C_t - want_t), abs(C_s - want_s))
        worst_slack = max(worst_slack, slack)
        assert slack < 1e-12, (name, slack)
        nested = nested_ball_bound_check(s)
        assert nested.passed, (name, nested.witness)
        chain = ball_chain_check(s)
        assert chain.passed and chain.failures == 0, name
    dt = time.perf_counter() - t0
    _report(1, dt < 10.0,
            f"geometry on {len(names)} spaces, witness slack "
            f"{worst_slack:.2e}, nested and chain 100%, {dt:.1f}s < 10s")


def test_criterion_2_norm_suite():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    scale = 3.7
    for name in ("grid-4", "grid-16", "two-atom"):
        s = get_space(name)
        F = rng.uniform(-2.0, 2.0, (s.n, 200))
        grand = make_grand_params(2.0, 0.3, "pow:1", "lin:1",
                                  MorreyVariant(), 32)
        norms = [
            lambda V: lebesgue_norm(V, s, 2.0),
            lambda V: morrey_norm(V, s, 2.0, 0.3, MorreyVariant()),
            lambda V: morrey_norm(V, s, 2.0, 0.3,
                                  MorreyVariant(kind="radius", gamma=1.0)),
            lambda V: morrey_norm(V, s, 2.0, 0.3,
                                  MorreyVariant(kind="modified", dilation=2.0,
                                                radius_cap="none")),
            lambda V: grand_morrey_norm(V, s, grand),
            lambda V: grand_lebesgue_norm(V, s, 2.0),
        ]
        for norm in norms:
            base = np.asarray(norm(F), dtype=float)
            scaled = np.asarray(norm(scale * F), dtype=float)
            assert np.allclose(scaled, scale * base, rtol=1e-12, atol=0.0)
            grown = np.asarray(
                norm(np.abs(F) * (1.0 + rng.uniform(0.0, 1.0, F.shape))),
                dtype=float)
            assert np.all(grown >= base * (1.0 - 1e-12))
    # with no Morrey weight and a power grandifier the grand norm collapses
    # to the grand Lebesgue norm on spaces whose balls reach the whole space
    worst_gap = 0.0
    for name in ("grid-4", "grid-16", "grid-64"):
        s = get_space(name)
        F = rng.uniform(0.0, 2.0, (s.n, 50))
        for theta in (1.0, 2.0):
            params = make_grand_params(2.0, 0.0, f"pow:{theta:g}", "zero",
                                       MorreyVariant(), 64, closed_grid=True)
            gm = np.asarray(grand_morrey_norm(F, s, params), dtype=float)
            gl = np.asarray(grand_lebesgue_norm(F, s, 2.0, theta=theta),
                            dtype=float)
            gap = float((np.abs(gm - gl) / gl).max())
            worst_gap = max(worst_gap, gap)
            assert gap <= 1e-12, (name, theta, gap)
    for name in ("grid-4", "grid-16", "grid-64", "snowflake-16"):
        s = get_space(name)
        assert abs(float(s.weights.sum()) - 1.0) < 1e-12
        F = rng.uniform(-1.0, 1.0, (s.n, 200))
        for p1, p2 in ((1.0, 1.5), (1.3, 2.0), (2.0, 3.0), (1.5, 4.0)):
            n1 = np.asarray(lebesgue_norm(F, s, p1), dtype=float)
            n2 = np.asarray(lebesgue_norm(F, s, p2), dtype=float)
            assert np.all(n1 <= n2 * (1.0 + 1e-12)), (name, p1, p2)
    dt = time.perf_counter() - t0
    _report(2, dt < 30.0,
            f"homogeneity/monotonicity on 200 functions per space, grand "
            f"Lebesgue collapse gap {worst_gap:.2e}, ordering on 4 "
            f"probability spaces, {dt:.1f}s < 30s")


_BUNDLES = (
    ("grid-4", 2.0, 0.3, "pow:1", "lin:1", MorreyVariant()),
    ("grid-16", 2.5, 0.45, "pow:2", "pow:1.5", MorreyVariant()),
    ("snowflake-16", 1.8, 0.2, "alog:1", "lin:0.5",
     MorreyVariant(kind="radius", gamma=2.0)),
)


def test_criterion_3_dominance_and_reduction():
    t0 = time.perf_counter()
    rng = np.random.default_rng(303)
    checked = 0
    for name, p, lam, phi, A, variant in _BUNDLES:
        s = get_space(name)
        params = make_grand_params(p, lam, phi, A, variant, 32)
        for _ in range(100):
            f = rng.uniform(0.0, 3.0, s.n)
            sigma = float(rng.uniform(0.02, 0.4)) * params.s_max
            upper = float(rng.uniform(sigma * 1.05, params.s_max))
            rep = verify_dominance(s, f, params, sigma, upper)
            assert rep.ratio <= 1.0 + 1e-12, (name, sigma, upper)
            assert rep.structural_pass, (name, sigma, upper)
            checked += 1
        fam = generate_family(s, "ball-indicators")
        red = verify_reduction(s, fam, lambda V, sp=s: maximal(V, sp),
                               params, params, params.s_max / 4.0,
                               inequality="acceptance-maximal")
        assert red.checks["internal_consistency"]
        assert red.ratio <= red.bound * (1.0 + 1e-9)
    dt = time.perf_counter() - t0
    _report(3, dt < 60.0,
            f"{checked} dominance configurations over 3 bundles plus "
            f"reduction consistency, {dt:.1f}s < 60s")


def test_criterion_4_maximal_operators():
    rng = np.random.default_rng(404)
    shipped = sorted(catalog())
    for name in shipped:
        s = get_space(name)
        F = rng.uniform(-2.0, 2.0, (s.n, 20))
        M = np.asarray(maximal(F, s), dtype=float)
        assert np.all(M >= np.abs(F) - 1e-12), name
    for name in ("grid-4", "grid-16", "circle-16", "two-atom"):
        s = get_space(name)
        for _ in range(25):
            rep = verify_weak_type(s, rng.uniform(0.0, 5.0, s.n))
            assert rep.ratio <= 1.0 + 1e-12, name
            assert rep.structural_pass, name
    for p in (1.5, 2.0, 3.0):
        bound = 2.0 * (p / (p - 1.0)) ** (1.0 / p)
        for name in ("grid-16", "circle-16"):
            s = get_space(name)
            C_t, C_s = quasimetric_constants(s)
            N0 = C_t * (1.0 + 2.0 * C_s)
            F = rng.uniform(-1.0, 1.0, (s.n, 50))
            num = np.asarray(lebesgue_norm(
                modified_maximal(F, s, N0), s, p), dtype=float)
            den = np.asarray(lebesgue_norm(F, s, p), dtype=float)
            assert np.all(num <= bound * den * (1.0 + 1e-12)), (name, p)
    worst_uniformity = 1.0
    for name in shipped:
        s = get_space(name)
        params = make_grand_params(2.0, 0.3, "pow:1", "lin:1",
                                   MorreyVariant(), 32)
        fam = generate_family(s, "ball-indicators")
        M = np.asarray(maximal(fam.values, s), dtype=float)
        ratios = []
        for eps in grid_for(params).nodes:
            pe = 2.0 - float(eps)
            le = 0.3 - float(params.A(float(eps)))
            iv = inner_seminorm_matrix(fam.values, s, pe, le, params.variant)
            ov = inner_seminorm_matrix(M, s, pe, le, params.variant)
            use = iv > 0
            ratios.append(float((ov[use] / iv[use]).max()))
        ratios = np.asarray(ratios)
        uniformity = float(ratios.max() / ratios.min())
        worst_uniformity = max(worst_uniformity, uniformity)
        assert uniformity < 10.0, (name, uniformity)
    _report(4, True,
            f"pointwise lower bound, exact weak (1,1), strong bound at "
            f"p in {{1.5, 2, 3}}, grid uniformity worst "
            f"{worst_uniformity:.3g} < 10 on {len(shipped)} spaces")


def test_criterion_5_hedberg_pointwise():
    t0 = time.perf_counter()
    triples = ((2.0, 0.5, 0.125), (2.0, 0.25, 0.25), (3.0, 0.5, 0.1))
    members = 0
    for name in ("grid-64", "circle-64"):
        s = get_space(name)
        assert np.isfinite(sharp_growth_constant(s))
        fam = generate_family(s, "mixed", seed=99)
        F = np.abs(fam.values)
        for p, lam, alpha in triples:
            for k in range(fam.size):
                rep = verify_hedberg(s, F[:, k], p, lam, alpha)
                assert rep.ratio <= 1.0 + 1e-12, \
                    (name, p, lam, alpha, fam.names[k])
                members += 1
    dt = time.perf_counter() - t0
    _report(5, dt < 60.0,
            f"pointwise domination on {members} member evaluations over two "
            f"growth-validated 64-pt spaces, zero failures, {dt:.1f}s < 60s")


def test_criterion_6_exponent_calculus():
    rng = np.random.default_rng(7)
    for _ in range(100):
        p = float(rng.uniform(1.2, 3.5))
        lam = float(rng.uniform(0.0, 0.8))
        gamma = float(rng.uniform(0.5, 2.0))
        alpha = float(rng.uniform(0.05, 0.95)) * (1.0 - lam) * gamma / p
        q = sobolev_exponent(p, lam, alpha, gamma)
        back = (1.0 / p - 1.0 / q) * (1.0 - lam) * gamma
        assert abs(back - alpha) <= 1e-12 * max(1.0, alpha)
    found, attempts, worst_rt = 0, 0, 0.0
    while found < 100:
        attempts += 1
        assert attempts < 2000, "admissible sampling stalled"
        p = float(rng.uniform(1.6, 2.6))
        lam = float(rng.uniform(0.1, 0.6))
        alpha = float(rng.uniform(0.3, 0.8)) * (1.0 - lam) / p
        q = sobolev_exponent(p, lam, alpha, 1.0)
        crit = 1.0 + alpha * q / (1.0 - lam)
        theta2 = float(rng.uniform(1.05, 1.6)) * crit
        slope = float(rng.uniform(0.05, 0.5)) * (1.0 - lam) ** 2 / (alpha * q * q)
        setup = make_potential_setup(p, lam, alpha, 1.0,
                                     f"lin:{slope:.12g}", 1.0, theta2, 0.1,
                                     mode="thm-4.4")
        if not setup.admissible:
            continue
        found += 1
        eps = float(rng.uniform(1e-4, setup.delta))
        y = float(aux_eval(setup, "phi-bar", eps))
        worst_rt = max(worst_rt, abs(invert_phi_bar(setup, y) - eps))
    assert worst_rt <= 1e-10

    setup = riesz_corollary_setup()
    xs = np.geomspace(1e-9, setup.delta, 60)
    bar = np.asarray(aux_eval(setup, "phi-bar", xs), dtype=float)
    assert bar[0] < 1e-9
    assert np.all(np.diff(bar) > 0)

    xs = np.geomspace(setup.delta * 1e-8, setup.delta, 200)
    bar = np.asarray(aux_eval(setup, "phi-bar", xs), dtype=float)
    a_bar = (setup.q - xs) / (setup.p - bar)
    psi = bar ** a_bar
    crit = 1.0 + setup.alpha * setup.q / ((1.0 - setup.lam) * setup.gamma)
    ratio = psi / xs ** crit
    decade = ratio[xs <= xs[0] * 10.0]
    spread = float(decade.max() / decade.min())
    assert spread < 1.01, spread
    _report(6, True,
            f"sobolev round trip 1e-12, passage inversion round trip "
            f"{worst_rt:.2e} <= 1e-10 on {found} admissible setups, "
            f"vanishing passage, tail spread {spread - 1.0:.2e} < 1%")


def test_criterion_7_end_to_end_certifications(tmp_path, monkeypatch):
    monkeypatch.setenv("MORREYLAB_OUTDIR", str(tmp_path))
    runs = ("thm-3.6", "prop-3.9", "thm-4.4", "thm-4.7", "lemma-5.2",
            "thm-5.4")
    timings = []
    for tid in runs:
        argv = ["certify", "run", "--theorem", tid, "circle-64",
                "--family", "mixed", "--seed", "7"]
        t0 = time.perf_counter()
        code = main(argv)
        dt = time.perf_counter() - t0
        assert code == 0, (tid, code)
        assert dt < 300.0, (tid, dt)
        path = tmp_path / f"{tid}-circle-64.json"
        first = path.read_bytes()
        assert main(argv) == 0, tid
        assert path.read_bytes() == first, f"{tid} rerun not byte-identical"
        timings.append(dt)
    _report(7, True,
            f"exit 0 and byte-identical reruns for {len(runs)} "
            f"certificates on circle-64, slowest {max(timings):.1f}s < 300s")
