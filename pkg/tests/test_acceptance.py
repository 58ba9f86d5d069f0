"""Exit criteria for the package, one test per criterion.

Each test records a one-line verdict; the lines are printed in the terminal summary
(see ``conftest.pytest_terminal_summary``).
"""
import io
import json
import math
import time

import numpy as np
import pytest

from conftest import oracle_instances
from hopbound.analytic import bounds, recursion
from hopbound.cli import main
from hopbound.core import mix_seed, sample_instance
from hopbound.exact import free_energy, solve_exact, solve_exact_naive
from hopbound.experiment import (ExperimentConfig, result_to_csv, result_to_json, run_experiment,
                                 upper_bound_violation_rate)
from hopbound.greedy import greedy_solve
from hopbound.spectral import eigen_solve

VERDICTS = []


def record(name, ok, detail):
    VERDICTS.append(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    assert ok, detail


def rel(a, b):
    return abs(a - b) / abs(b)


@pytest.fixture(scope="module")
def instances():
    return oracle_instances(200, seed=4242)


def _cli_json(*argv):
    out = io.StringIO()
    assert main(list(argv), out=out) == 0
    return json.loads(out.getvalue())


def test_1_recursion_reproduction():
    t0 = time.perf_counter()
    pos = _cli_json("recursion", "--alpha", "1", "--resolution", "1000000", "--form", "pos", "--json")
    neg = _cli_json("recursion", "--alpha", "1", "--resolution", "1000000", "--form", "neg", "--json")
    elapsed = time.perf_counter() - t0
    checks = [
        rel(pos["phi_n_over_n2"], 2.5259) <= 1e-2,
        rel(pos["sqrt_phi_n_over_n"], 1.5893) <= 1e-2,
        rel(neg["phi_n_over_n2"], 0.3072) <= 1e-2,
        rel(neg["sqrt_phi_n_over_n"], 0.55) <= 1e-2,
        elapsed <= 2 * 5.0,  # two invocations, 5 s each
    ]
    record("1 recursion reproduction", all(checks),
           f"pos {pos['phi_n_over_n2']:.5f}/{pos['sqrt_phi_n_over_n']:.5f}, "
           f"neg {neg['phi_n_over_n2']:.5f}/{neg['sqrt_phi_n_over_n']:.5f}, {elapsed:.2f}s")


def test_2_bound_values():
    b = bounds(1.0)
    got = (b.positive_lower, b.positive_upper, b.negative_lower_asymptotic, b.eigen_floor_asymptotic)
    want = (1.763, 1.798, 0.2021, 1.5958)
    ok = all(abs(g - w) <= 1e-3 for g, w in zip(got, want))
    record("2 bound values", ok, " ".join(f"{g:.5f}" for g in got))


def test_3_oracle_equivalence(instances):
    t0 = time.perf_counter()
    mismatches = 0
    for inst in instances:
        for form in ("pos", "neg"):
            a, b = solve_exact(inst, form), solve_exact_naive(inst, form)
            if a.report.raw_quadratic != b.report.raw_quadratic or not np.array_equal(a.sigma, b.sigma):
                mismatches += 1
    elapsed = time.perf_counter() - t0
    record("3 oracle equivalence", mismatches == 0 and elapsed <= 30,
           f"{mismatches} mismatches over {2 * len(instances)} solves, {elapsed:.2f}s")


def test_4_heuristic_dominance(instances):
    t0 = time.perf_counter()
    violations = 0
    for inst in instances:
        top = solve_exact(inst, "pos").report.raw_quadratic
        low = solve_exact(inst, "neg").report.raw_quadratic
        for ordering in ("natural", "by_column_norm"):
            violations += greedy_solve(inst, "pos", ordering)[1].raw_quadratic > top
            violations += greedy_solve(inst, "neg", ordering)[1].raw_quadratic < low
        violations += eigen_solve(inst).report.raw_quadratic > top
    elapsed = time.perf_counter() - t0
    record("4 heuristic dominance", violations == 0 and elapsed <= 30,
           f"{violations} violations, {elapsed:.2f}s")


@pytest.mark.parametrize("form", ["pos", "neg"])
def test_5_greedy_vs_recursion(form):
    t0 = time.perf_counter()
    cfg = ExperimentConfig(m=200, n=200, form=form, algorithms=("greedy",), trials=200, base_seed=505)
    res = run_experiment(cfg, workers=1)
    mean = res.aggregates["greedy"]["normalized_quadratic"]["mean"]
    target = recursion(200, 200, form).normalized_limit
    elapsed = time.perf_counter() - t0
    record(f"5 greedy vs recursion ({form})", rel(mean, target) <= 0.05 and elapsed <= 60,
           f"mean r_n/n^2 {mean:.5f} vs phi_n/n^2 {target:.5f} "
           f"(rel {rel(mean, target):.4f}), {elapsed:.2f}s")


def test_6_spectral_asymptotics():
    t0 = time.perf_counter()
    lam, mass, floor_ok = [], [], True
    for t in range(20):
        res = eigen_solve(sample_instance(400, 400, "gaussian", mix_seed(606, t)))
        lam.append(res.lambda1 / 400)
        mass.append((np.abs(res.q1).sum() / math.sqrt(400)) ** 2)
        floor_ok &= res.report.raw_quadratic >= res.guaranteed_floor
    elapsed = time.perf_counter() - t0
    ok = (rel(np.mean(lam), 4.0) <= 0.05 and rel(np.mean(mass), 2 / math.pi) <= 0.10
          and floor_ok and elapsed <= 60)
    record("6 spectral asymptotics", ok,
           f"lambda1/n {np.mean(lam):.4f}, (sum|q|/sqrt n)^2 {np.mean(mass):.4f}, "
           f"floor {'held' if floor_ok else 'violated'}, {elapsed:.2f}s")


def test_7_free_energy_bracket():
    t0 = time.perf_counter()
    betas = (1.0, 10.0, 100.0, 1e4)
    bad = 0
    for t in range(50):
        n = 2 + t % 11
        m = 1 + (t * 7) % 24
        inst = sample_instance(m, n, "gaussian", mix_seed(707, t))
        top = solve_exact(inst, "pos").report.normalized_quadratic
        low = solve_exact(inst, "neg").report.normalized_quadratic
        fp = [free_energy(inst, b, "pos").value for b in betas]
        fn = [free_energy(inst, b, "neg").value for b in betas]
        for b, f in zip(betas, fp):
            bad += not (top - 1e-9 <= f <= top + math.log(2) / b + 1e-9)
        for b, f in zip(betas, fn):
            bad += not (low - math.log(2) / b - 1e-9 <= f <= low + 1e-9)
        bad += any(b > a + 1e-12 for a, b in zip(fp, fp[1:]))
        bad += any(b < a - 1e-12 for a, b in zip(fn, fn[1:]))
    elapsed = time.perf_counter() - t0
    record("7 free-energy bracket", bad == 0 and elapsed <= 30, f"{bad} violations, {elapsed:.2f}s")


def test_8_determinism():
    cfg = ExperimentConfig(m=16, n=14, algorithms=("exact", "greedy", "greedy_sorted", "eigen"),
                           trials=8, base_seed=808)
    first, second, pooled = run_experiment(cfg, 1), run_experiment(cfg, 1), run_experiment(cfg, 4)
    outputs = [(result_to_json(r), result_to_csv(r)) for r in (first, second, pooled)]
    ok = outputs[0] == outputs[1] == outputs[2]
    record("8 determinism", ok, "repeat and 1-vs-4 worker outputs byte-identical" if ok else "outputs differ")


def test_9_universality():
    means = {}
    for ensemble in ("gaussian", "bernoulli"):
        cfg = ExperimentConfig(m=200, n=200, ensemble=ensemble, algorithms=("greedy",), trials=100,
                               base_seed=909)
        means[ensemble] = run_experiment(cfg, 1).aggregates["greedy"]["normalized_xi"]["mean"]
    diff = rel(means["bernoulli"], means["gaussian"])
    record("9 universality", diff <= 0.03,
           f"gaussian {means['gaussian']:.5f}, bernoulli {means['bernoulli']:.5f} (rel {diff:.4f})")


def test_note_upper_bound_soft_check():
    cfg = ExperimentConfig(m=100, n=100, algorithms=("greedy", "greedy_sorted", "eigen"), trials=100,
                           base_seed=1010)
    rates = upper_bound_violation_rate(run_experiment(cfg, 1))
    record("note upper-bound soft check", all(r <= 0.01 for r in rates.values()),
           ", ".join(f"{k} {v:.2%}" for k, v in rates.items()))
