"""Acceptance suite: one PASS/FAIL line per criterion.

Run alone with ``pytest tests/test_acceptance.py -s`` or ``python tests/test_acceptance.py``.
"""
import json
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from neutral_kimura import cli, kimura
from neutral_kimura import special_functions as sf
from neutral_kimura.quadrature import adaptive_integrate, gauss_gegenbauer
from neutral_kimura.wf_oracle import WfConfig, generation_for_time, simulate, time_map

ALPHAS = (0.6, 0.9, 0.999, 1.0, 1.001, 1.5, 2.0, 3.25)
T_GRID = (-0.5, -0.3, -0.1, 0.1, 0.3, 0.5)
CONSERVATION_TIMES = (0.05, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0)
X0_GRID = tuple(round(0.1 * i, 1) for i in range(1, 10))
MC_SEED = 20240601


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\nacceptance {number}: {'PASS' if ok else 'FAIL'}  {detail}")
    return emit


def test_criterion_1_integral_identities(report):
    start = time.perf_counter()
    worst = 0.0
    for alpha in ALPHAS:
        for n in range(21):
            c = sf.integral_identity_const(alpha, n)
            q = adaptive_integrate(lambda x: sf.gegenbauer_eval(alpha, n, x), (-1.0, 1.0), 1e-12)
            worst = max(worst, abs(c - q))
            c = sf.integral_identity_linear(alpha, n)
            q = adaptive_integrate(lambda x: x * sf.gegenbauer_eval(alpha, n, x), (-1.0, 1.0), 1e-12)
            worst = max(worst, abs(c - q))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed < 5.0
    report(1, ok, f"max abs error {worst:.2e} (tol 1e-10), {elapsed:.2f}s (limit 5s)")
    assert ok


def test_criterion_2_orthogonality(report):
    start = time.perf_counter()
    worst_off = worst_diag = 0.0
    for alpha in (0.6, 1.5, 2.5):
        rule = gauss_gegenbauer(21, alpha)
        table = sf.gegenbauer_table(alpha, 20, rule.nodes)
        gram = np.array([[math.fsum(rule.weights * table[i] * table[j]) for j in range(21)] for i in range(21)])
        norms = np.array([sf.orthogonality_norm(alpha, n) for n in range(21)])
        worst_off = max(worst_off, np.abs(gram - np.diag(np.diag(gram))).max())
        worst_diag = max(worst_diag, np.max(np.abs(np.diag(gram) - norms) / norms))
    elapsed = time.perf_counter() - start
    ok = worst_off <= 1e-12 and worst_diag <= 1e-9 and elapsed < 5.0
    report(2, ok, f"off-diagonal {worst_off:.2e} (tol 1e-12), diagonal rel {worst_diag:.2e} (tol 1e-9), {elapsed:.2f}s")
    assert ok


def test_criterion_3_generating_closed_forms(report):
    worst_quad = worst_series = 0.0
    for alpha in ALPHAS:
        for t in T_GRID:
            kernel = lambda x: (1.0 - 2.0 * x * t + t * t) ** (-alpha)
            q = adaptive_integrate(kernel, (-1.0, 1.0), 1e-12)
            worst_quad = max(worst_quad, abs(sf.f_closed(alpha, t) - q))
            q = adaptive_integrate(lambda x: x * kernel(x), (-1.0, 1.0), 1e-12)
            worst_quad = max(worst_quad, abs(sf.xmoment_gen_closed(alpha, t) - q))
            if abs(t) <= 0.3:
                worst_series = max(worst_series, abs(sf.f_closed(alpha, t) - sf.f_series(alpha, t, 30)))
                worst_series = max(worst_series, abs(sf.xmoment_gen_closed(alpha, t) - sf.xmoment_series(alpha, t, 30)))
    ok = worst_quad <= 1e-10 and worst_series <= 1e-10
    report(3, ok, f"vs quadrature {worst_quad:.2e}, vs 30-term series {worst_series:.2e} (tol 1e-10)")
    assert ok


def test_criterion_4_conservation(report):
    start = time.perf_counter()
    worst_delta = 0.0
    for x0 in X0_GRID:
        rep = kimura.conservation_report(kimura.solve(kimura.Delta(x0), 60), CONSERVATION_TIMES)
        worst_delta = max(worst_delta, rep.mass_residual.max(), rep.mean_residual.max())
    smooth = kimura.solve(kimura.PolynomialDensity((0.0, 6.0, -6.0)))
    rep = kimura.conservation_report(smooth, (0.0,) + CONSERVATION_TIMES)
    worst_smooth = max(rep.mass_residual.max(), rep.mean_residual.max())
    elapsed = time.perf_counter() - start
    ok = worst_delta <= 1e-6 and worst_smooth <= 1e-8 and elapsed < 2.0
    report(4, ok, f"delta {worst_delta:.2e} (tol 1e-6), smooth {worst_smooth:.2e} (tol 1e-8), {elapsed:.2f}s (limit 2s)")
    assert ok


def test_criterion_5_moment_facts(report):
    worst = 0.0
    for n in range(21):
        c = adaptive_integrate(lambda x: sf.gegenbauer_shifted_eval(1.5, n, x), (0.0, 1.0), 1e-13)
        l = adaptive_integrate(lambda x: x * sf.gegenbauer_shifted_eval(1.5, n, x), (0.0, 1.0), 1e-13)
        worst = max(worst, abs(c - (1.0 if n % 2 == 0 else 0.0)), abs(l - 0.5))
    ok = worst <= 1e-11
    report(5, ok, f"max abs error {worst:.2e} (tol 1e-11)")
    assert ok


def _decay_slope(x0):
    sol = kimura.solve(kimura.Delta(x0), 60)
    t = np.linspace(1.0, 3.0, 41)
    rem = np.abs(kimura.asymptotic_remainder(sol, t))
    return np.polyfit(t, np.log(rem), 1)[0]


def test_criterion_6_asymptotic_rate(report):
    s3, s5 = _decay_slope(0.3), _decay_slope(0.5)
    ok = abs(s3 + 6.0) <= 0.1 and abs(s5 + 12.0) <= 0.2
    report(6, ok, f"slope x0=0.3: {s3:.4f} (-6 +/- 0.1), x0=0.5: {s5:.4f} (-12 +/- 0.2)")
    assert ok


def test_criterion_7_mode_residuals(report):
    worst = float(np.max(kimura.mode_residuals(60, grid_points=101)))
    ok = worst <= 1e-8
    report(7, ok, f"max per-mode residual {worst:.2e} over n <= 60 (tol 1e-8)")
    assert ok


def test_criterion_8_monte_carlo(report):
    n_pop = 200
    start = time.perf_counter()
    worst_z = 0.0
    worst_het = -np.inf
    details = []
    for x0 in (0.1, 0.3, 0.5):
        gens = [generation_for_time(t, n_pop) for t in CONSERVATION_TIMES]
        stats = simulate(WfConfig(population_size=n_pop, x0=x0, generations=max(gens),
                                  replicates=100_000, seed=MC_SEED))
        sol = kimura.solve(kimura.Delta(x0), 60)
        tg = time_map(np.array(gens), n_pop)
        b = kimura.fixation_probability(sol, tg)
        se = stats.fraction_stderr(b)
        z = (stats.fixed_fraction[gens] - b) / se
        h = stats.mean_heterozygosity[gens] / stats.mean_heterozygosity[0]
        h_se = stats.mean_heterozygosity_stderr[gens] / stats.mean_heterozygosity[0]
        het_excess = np.abs(h - np.exp(-2 * tg)) - (3 * h_se + 1.0 / n_pop)
        worst_z = max(worst_z, np.max(np.abs(z)))
        worst_het = max(worst_het, het_excess.max())
        i = int(np.argmax(np.abs(z)))
        details.append(f"x0={x0}: max|z|={abs(z[i]):.2f} at t={tg[i]:g}")
    elapsed = time.perf_counter() - start
    ok = worst_z <= 4.0 and worst_het <= 0.0 and elapsed < 60.0
    report(8, ok, f"{'; '.join(details)}; heterozygosity margin {-worst_het:.2e}; {elapsed:.1f}s (limit 60s)")
    assert ok


def test_criterion_9_determinism(report, tmp_path):
    cfg = tmp_path / "scenario.json"
    cfg.write_text(json.dumps({
        "initial_condition": {"type": "delta", "x0": 0.3},
        "times": [0.1, 1.0, 5.0],
        "output_grid": 51,
        "wf": {"population_size": 200, "replicates": 10000, "seed": 42},
    }))
    for run in ("a", "b"):
        assert cli.main(["solve", "--config", str(cfg), "--out", str(tmp_path / run)]) == 0
        cli.main(["validate-mc", "--config", str(cfg), "--out", str(tmp_path / run)])
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    same = names == sorted(p.name for p in (tmp_path / "b").iterdir()) and all(
        (tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes() for n in names)
    ok = same and "mc_compare.csv" in names and "summary.csv" in names
    report(9, ok, f"{len(names)} files byte-identical across two runs")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([str(Path(__file__)), "-q", "-s", "-p", "no:cacheprovider"]))
