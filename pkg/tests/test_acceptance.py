"""Acceptance gate: one test per headline criterion, each printing a
PASS/FAIL line with its measured values and enforcing the stated
tolerance and runtime budget.

The empirical portfolio criterion only runs when the daily-return CSVs
are supplied through environment variables (see README); everything else
is self-contained and seeded.
"""

import functools
import math
import os
import time

import numpy as np
import pytest

from actfactors.act import (
    act_estimate,
    adjust_eigenvalues,
    companion_stieltjes,
    default_r_max,
    law_from_spectrum_tail,
    partial_stieltjes,
    predicted_spike,
)
from actfactors.baselines import BaiNgVariant, bai_ng_estimate, er_estimate, gr_estimate
from actfactors.harness import ExperimentConfig, run_experiment, run_table1
from actfactors.models import (
    SeededRng,
    build_case,
    intro_counterexample_spec,
    population_correlation,
    sample_data,
)
from actfactors.spectral import (
    Spectrum,
    eigenvalues_desc,
    sample_covariance,
    to_correlation,
)

MASTER_SEED = 20260810


def report(criterion: str, ok: bool, detail: str) -> None:
    print(f"ACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"{criterion}: {detail}"


def cell_entry(config: ExperimentConfig, method: str) -> dict:
    rep = run_experiment(config)
    assert len(rep.cells) == 1
    return rep.cells[0]["methods"][method]


def spectrum(values, n=0):
    values = np.asarray(values, dtype=float)
    return Spectrum(values, p=values.size, n=n)


def test_criterion_1_population_count_table():
    t0 = time.time()
    table = run_table1(seeds=20, master_seed=MASTER_SEED)
    bad = []
    for cell in table["cells"]:
        expected = cell["K"] if cell["scenario"] == 1 else cell["K"] - 1
        if any(c != expected for c in cell["counts"]):
            bad.append(cell)
    elapsed = time.time() - t0
    report(
        "1 population-count table",
        not bad and elapsed < 10.0,
        f"{24 - len(bad)}/24 cells exact over 20 seeds, {elapsed:.1f}s (< 10s)",
    )


def test_criterion_2_case1_true_rate():
    t0 = time.time()
    entry = cell_entry(
        ExperimentConfig(
            cases=(1,), p_values=(100,), n_values=(300,), replications=200,
            master_seed=MASTER_SEED, methods=("ACT",),
        ),
        "ACT",
    )
    elapsed = time.time() - t0
    ok = entry["true_pct"] >= 98.0 and elapsed < 60.0
    report(
        "2 case-1 p=100 adjusted-threshold",
        ok,
        f"TRUE={entry['true_pct']:.1f}% (>= 98), {elapsed:.1f}s (< 60s)",
    )


def test_criterion_3_case2_true_rates():
    t0 = time.time()
    rep = run_experiment(
        ExperimentConfig(
            cases=(2,), p_values=(500,), n_values=(300,), replications=200,
            master_seed=MASTER_SEED, methods=("ACT", "ER"),
        )
    )
    methods = rep.cells[0]["methods"]
    act_true = methods["ACT"]["true_pct"]
    er_true = methods["ER"]["true_pct"]
    elapsed = time.time() - t0
    ok = act_true >= 94.0 and abs(er_true - 88.9) <= 10.0 and elapsed < 300.0
    report(
        "3 case-2 p=500 adjusted-threshold and eigenvalue-ratio",
        ok,
        f"ACT TRUE={act_true:.1f}% (>= 94), ER TRUE={er_true:.1f}% (88.9 +/- 10), "
        f"{elapsed:.1f}s (< 300s)",
    )


def test_criterion_4_case3_hard_then_recovers():
    t0 = time.time()
    hard = cell_entry(
        ExperimentConfig(
            cases=(3,), p_values=(100,), n_values=(300,), replications=200,
            master_seed=MASTER_SEED, methods=("ACT",),
        ),
        "ACT",
    )
    big = cell_entry(
        ExperimentConfig(
            cases=(3,), p_values=(1000,), n_values=(300,), replications=100,
            master_seed=MASTER_SEED + 1, methods=("ACT",),
        ),
        "ACT",
    )
    elapsed = time.time() - t0
    ok = (
        hard["true_pct"] <= 5.0
        and hard["under_pct"] >= 90.0
        and big["true_pct"] >= 90.0
        and elapsed < 600.0
    )
    report(
        "4 case-3 hard regime then recovery",
        ok,
        f"p=100: TRUE={hard['true_pct']:.1f}% (<= 5), UNDER={hard['under_pct']:.1f}% (>= 90); "
        f"p=1000: TRUE={big['true_pct']:.1f}% (>= 90); {elapsed:.1f}s (< 600s)",
    )


def test_criterion_5_case4_true_rate():
    entry = cell_entry(
        ExperimentConfig(
            cases=(4,), p_values=(100,), n_values=(300,), replications=200,
            master_seed=MASTER_SEED, methods=("ACT",),
        ),
        "ACT",
    )
    report(
        "5 case-4 p=100 adjusted-threshold",
        entry["true_pct"] >= 93.0,
        f"TRUE={entry['true_pct']:.1f}% (>= 93)",
    )


def test_criterion_6_noise_bulk_edge():
    p = n = 300
    tops = []
    for rep in range(50):
        rng = SeededRng(MASTER_SEED + 2, rep).generator()
        X = rng.standard_normal((n, p))
        spec = eigenvalues_desc(to_correlation(sample_covariance(X)), n)
        tops.append(spec.eigenvalues[0])
    med = float(np.median(tops))
    report(
        "6 pure-noise bulk edge",
        3.85 <= med <= 4.15,
        f"median top eigenvalue={med:.4f} in [3.85, 4.15] around (1+sqrt(1))^2",
    )


@functools.lru_cache(maxsize=1)
def _criterion_7_errors():
    p, n, K, reps = 500, 300, 5, 100
    rho = p / (n - 1)
    err_corrected = np.empty((reps, K))
    err_raw = np.empty((reps, K))
    for rep in range(reps):
        g = SeededRng(MASTER_SEED + 3, rep).generator()
        spec = build_case(4, p, K, g)
        pop = eigenvalues_desc(population_correlation(spec))
        lam = pop.eigenvalues
        law = law_from_spectrum_tail(pop, K, rho)
        X = sample_data(spec, n, g)
        sample_spec = eigenvalues_desc(to_correlation(sample_covariance(X)), n)
        adj = adjust_eigenvalues(sample_spec, n, r_max=K)
        for j in range(K):
            err_corrected[rep, j] = abs(adj.adjusted[j] - lam[j]) / lam[j]
            predicted = predicted_spike(lam[j], law)
            err_raw[rep, j] = abs(sample_spec.eigenvalues[j] - predicted) / lam[j]
    return np.median(err_corrected, axis=0), np.median(err_raw, axis=0)


def test_criterion_7a_corrected_eigenvalue_consistency():
    # KNOWN RED. The correction formula's synthetic node contributes
    # -4/(sample spike gap) to the trailing sum; this scenario's five spikes
    # cluster (population values ~10-16 with gaps ~1), so the corrected
    # values undershoot by 10-17% at p=500 and the 10% bound is not
    # attainable with the formula as defined. The implementation is exact on
    # separated spikes (see test_act.py oracle agreement at 2-7%).
    med_c, _ = _criterion_7_errors()
    report(
        "7a corrected-eigenvalue consistency",
        bool(np.all(med_c <= 0.10)),
        "median corrected rel err per spike="
        + "/".join(f"{v:.3f}" for v in med_c)
        + " (<= 0.10)",
    )


def test_criterion_7b_raw_spike_map():
    _, med_r = _criterion_7_errors()
    report(
        "7b raw eigenvalues follow the spike map",
        bool(np.all(med_r <= 0.10)),
        "median raw-vs-spike-map rel err="
        + "/".join(f"{v:.3f}" for v in med_r)
        + " (<= 0.10)",
    )


def test_criterion_8_counterexample():
    p, n, K, reps = 200, 300, 5, 200
    er_over = 0
    act_true = 0
    for rep in range(reps):
        g = SeededRng(MASTER_SEED + 4, rep).generator()
        spec = intro_counterexample_spec(p, K, 25.0, g)
        X = sample_data(spec, n, g)
        cov = sample_covariance(X)
        r_max = default_r_max(p, n)
        if er_estimate(eigenvalues_desc(cov, n), r_max) >= K + 1:
            er_over += 1
        if act_estimate(eigenvalues_desc(to_correlation(cov), n), n, r_max) == K:
            act_true += 1
    report(
        "8 scaled-noise counterexample",
        er_over / reps >= 0.9 and act_true / reps >= 0.9,
        f"P(ratio count >= {K + 1})={er_over / reps:.2f} (>= 0.9), "
        f"ACT TRUE={act_true / reps:.2f} (>= 0.9)",
    )


class TestCriterion9Properties:
    def test_shrinkage_over_many_spectra(self):
        rng = np.random.default_rng(MASTER_SEED)
        violations = 0
        trials = 10_000
        for _ in range(trials):
            p = int(rng.integers(5, 24))
            n = int(rng.integers(4, 120))
            lam = np.sort(rng.uniform(0.0, 8.0, p))[::-1]
            r_max = min(default_r_max(p, n), p - 2)
            if r_max < 1:
                continue
            adj = adjust_eigenvalues(spectrum(lam, n), n, r_max)
            if not (np.all(adj.adjusted > 0) and np.all(adj.adjusted <= lam[:r_max] * (1 + 1e-12))):
                violations += 1
        report(
            "9a shrinkage property",
            violations == 0,
            f"0 < corrected <= raw held in {trials - violations}/{trials} random spectra",
        )

    def test_column_rescaling_invariance(self):
        mism = 0
        trials = 100
        for t in range(trials):
            g = SeededRng(MASTER_SEED + 5, t).generator()
            n, p, k = 60, 15, 2
            X = g.standard_normal((n, k)) @ g.uniform(-1, 1, (k, p)) + g.standard_normal((n, p))
            d = g.uniform(1e-4, 1e4, p)
            a = act_estimate(eigenvalues_desc(to_correlation(sample_covariance(X)), n), n)
            b = act_estimate(eigenvalues_desc(to_correlation(sample_covariance(X * d)), n), n)
            if a != b:
                mism += 1
        report(
            "9b column-rescaling invariance",
            mism == 0,
            f"identical counts in {trials - mism}/{trials} rescaled panels",
        )

    def test_trace_and_closure_invariants(self):
        worst = 0.0
        for t in range(50):
            g = SeededRng(MASTER_SEED + 6, t).generator()
            n = int(g.integers(5, 80))
            p = int(g.integers(2, 40))
            X = g.standard_normal((n, p)) * g.uniform(0.1, 10.0, p)
            spec = eigenvalues_desc(to_correlation(sample_covariance(X)), n)
            worst = max(worst, abs(float(spec.eigenvalues.sum()) - p) / p)
        closure_config = ExperimentConfig(
            cases=(2,), p_values=(30,), n_values=(40,), k_true=3, replications=25,
            master_seed=MASTER_SEED, methods=("ACT", "ER", "GR", "KAISER", "PC1", "IC2"),
        )
        rep = run_experiment(closure_config)
        closure_ok = True
        for cell in rep.cells:
            for entry in cell["methods"].values():
                n_parts = (
                    entry["true_count"] + entry["over_count"]
                    + entry["under_count"] + entry["failed_count"]
                )
                if n_parts != cell["replications"]:
                    closure_ok = False
                if entry["true_pct"] is not None:
                    s = entry["true_pct"] + entry["over_pct"] + entry["under_pct"]
                    if abs(s - 100.0) > 1e-9:
                        closure_ok = False
        report(
            "9c trace and closure invariants",
            worst <= 1e-8 and closure_ok,
            f"max |trace - p|/p = {worst:.2e} (<= 1e-8); tallies partition R with shares summing to 100",
        )

    def test_hand_oracles(self):
        checks = []

        spec4 = spectrum([4.0, 1.0, 0.5, 0.5])
        oracle_partial = (
            1.0 / (1.0 - 4.0) + 2.0 / (0.5 - 4.0) + 1.0 / (3.25 - 4.0)
        ) / 3.0
        checks.append(abs(partial_stieltjes(1, spec4, 4.0) - oracle_partial) <= 1e-9)

        spec2 = spectrum([2.0, 0.0])
        checks.append(abs(partial_stieltjes(1, spec2, 2.0) - (-2.5)) <= 1e-9)

        oracle_comp = -(1.0 - 0.75) / 4.0 + 0.75 * oracle_partial
        checks.append(abs(companion_stieltjes(1, spec4, 5, 4.0) - oracle_comp) <= 1e-9)
        checks.append(abs(companion_stieltjes(1, spec2, 3, 2.0) - (-1.5)) <= 1e-9)

        adj = adjust_eigenvalues(spec4, 5, r_max=1)
        checks.append(abs(adj.adjusted[0] - (-1.0 / oracle_comp)) <= 1e-9)

        lam = [8.0, 4.0, 1.0, 0.5, 0.4]
        v = [sum(lam[i:]) for i in range(5)] + [0.0]
        gr_crit = [
            math.log(v[i - 1] / v[i]) / math.log(v[i] / v[i + 1]) for i in (1, 2, 3)
        ]
        checks.append(gr_estimate(spectrum(lam), 3) == int(np.argmax(gr_crit)) + 1 == 2)
        checks.append(
            max(abs(a - b) for a, b in zip(gr_crit, [0.7562772, 1.5164302, 0.9214287])) <= 1e-6
        )

        mu = [10.0, 5.0] + [1.0] * 48
        g3 = math.log(50.0) / 50.0
        ic_crit = [math.log(sum(mu[k:]) / 50.0) + k * g3 for k in range(4)]
        got = bai_ng_estimate(
            Spectrum(np.array(mu), p=50, n=100), 100, 50, BaiNgVariant("IC", "g3"), 3
        )
        checks.append(got == int(np.argmin(ic_crit)) == 2)
        checks.append(
            max(
                abs(a - b)
                for a, b in zip(ic_crit, [0.2311117, 0.1365094, 0.1156589, 0.1728460])
            )
            <= 1e-6
        )

        report(
            "9d hand oracles",
            all(checks),
            f"{sum(checks)}/{len(checks)} oracle equalities held (transforms to 1e-9)",
        )


FF_ENV = {
    "pre": ("ACTFACTORS_FF_PRE_CSV", "ACTFACTORS_FF_FACTORS_PRE_CSV"),
    "post": ("ACTFACTORS_FF_POST_CSV", "ACTFACTORS_FF_FACTORS_POST_CSV"),
}
_ff_available = all(os.environ.get(v) for pair in FF_ENV.values() for v in pair)


@pytest.mark.skipif(
    not _ff_available,
    reason="daily portfolio CSVs not provided (set ACTFACTORS_FF_*_CSV env vars)",
)
def test_criterion_10_portfolio_panels():
    from actfactors.analysis import ols_r2, pc_scores, projection_distance
    from actfactors.panel import ingest_csv

    pre = ingest_csv(os.environ[FF_ENV["pre"][0]], drop_missing=True)
    pre_factors = ingest_csv(os.environ[FF_ENV["pre"][1]], drop_missing=True)
    post = ingest_csv(os.environ[FF_ENV["post"][0]], drop_missing=True)

    spec_pre = eigenvalues_desc(to_correlation(sample_covariance(pre.data)), pre.n)
    spec_post = eigenvalues_desc(to_correlation(sample_covariance(post.data)), post.n)
    k_pre = act_estimate(spec_pre, pre.n)
    k_post = act_estimate(spec_post, post.n)

    scores = pc_scores(pre.data, 4, basis="correlation")
    fmat = pre_factors.data.values
    r2_market = ols_r2(fmat[:, 0], scores)
    op, frob = projection_distance(fmat[:, :4], scores)

    ok = (
        k_pre == 4
        and k_post == 3
        and abs(r2_market - 0.953) <= 0.02
        and abs(op - 0.973) <= 0.02
        and abs(frob - 1.591) <= 0.02
    )
    report(
        "10 portfolio panels",
        ok,
        f"k_pre={k_pre} (4), k_post={k_post} (3), market R2={r2_market:.3f} (0.953 +/- 0.02), "
        f"norms=({op:.3f}, {frob:.3f}) ((0.973, 1.591) +/- 0.02)",
    )
