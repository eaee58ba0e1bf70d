"""Exit criteria. Each test records one PASS/FAIL line, printed after the run.

Criteria 5-7 are Monte-Carlo sweeps; criterion 6 runs at the full
128 x 72 array size with 1000 trials and takes tens of minutes on one core.
Deselect with ``-m "not slow"``.
"""

import math
import time
import warnings

import numpy as np
import pytest
from scipy.integrate import simpson
from scipy.optimize import minimize_scalar

from conftest import ACCEPTANCE, crandn
from robust_hybrid.array_channel import ArrayGeometry, MisalignmentModel, build_channel, draw_paths
from robust_hybrid.cmls_gp import CmlsProblem, GpConfig, gp_solve, line_search_step, random_phase, residual
from robust_hybrid.joint_design import DesignInputs, design_nonrobust, design_robust, expected_channel
from robust_hybrid.robust_steering import expected_array_response
from robust_hybrid.sim.config import SystemConfig
from robust_hybrid.sim.sweep import emit_csv, summarize, sweep_samples

PAPER_DELTA_DEG = 1.154
PAPER = MisalignmentModel.from_degrees(PAPER_DELTA_DEG)
SEED = 2024


def record(key, passed, detail):
    ACCEPTANCE[key] = (bool(passed), detail)
    assert passed, detail


# ---------------------------------------------------------------- criterion 1


def test_c1_closed_form_matches_quadrature():
    t0 = time.perf_counter()
    M = 128
    geom = ArrayGeometry(M)
    b = PAPER.bound
    d = np.linspace(-b, b, 10_001)
    m = np.arange(M)[:, None]
    worst_approx = worst_exact = worst_exact_elementwise = 0.0
    for deg in (30, 60, 90, 120):
        th = math.radians(deg)
        v = expected_array_response(geom, th, PAPER).vector
        approx = simpson(np.exp(1j * np.pi * m * (math.cos(th) - math.sin(th) * d)), x=d, axis=1) / (2 * b * math.sqrt(M))
        exact = simpson(np.exp(1j * np.pi * m * np.cos(th + d)), x=d, axis=1) / (2 * b * math.sqrt(M))
        worst_approx = max(worst_approx, np.max(np.abs(v - approx) / np.abs(approx)))
        # deviation in units of the undamped element modulus 1/sqrt(M)
        worst_exact = max(worst_exact, np.max(np.abs(v[:32] - exact[:32])) * math.sqrt(M))
        worst_exact_elementwise = max(worst_exact_elementwise, np.max(np.abs(v[:32] - exact[:32]) / np.abs(exact[:32])))
    elapsed = time.perf_counter() - t0
    ok = worst_approx <= 1e-3 and worst_exact <= 0.02 and elapsed < 1.0
    record(
        1,
        ok,
        f"approx-integrand max rel err {worst_approx:.1e} (<=1e-3); exact-integrand m<=32 max err "
        f"{100 * worst_exact:.2f}% of 1/sqrt(M) (<=2%; element-wise relative {100 * worst_exact_elementwise:.1f}%); "
        f"{elapsed:.2f}s",
    )


# ---------------------------------------------------------------- criterion 2


def test_c2_zero_misalignment_identity():
    zero = MisalignmentModel(0.0)
    tx, rx = ArrayGeometry(128), ArrayGeometry(72)
    worst_design = worst_channel = 0.0
    for seed in range(20):
        paths = draw_paths(10, 1.0, zero, zero, np.random.default_rng(seed))
        H = build_channel(paths, tx, rx).matrix
        worst_channel = max(worst_channel, np.max(np.abs(expected_channel(paths, tx, rx, zero, zero) - H)))
        inputs = DesignInputs(paths, tx, rx, 4, 8, 8, zero, zero, H)
        f1, w1 = design_robust(inputs, rng=np.random.default_rng(seed))
        f2, w2 = design_nonrobust(inputs, rng=np.random.default_rng(seed))
        worst_design = max(worst_design, np.max(np.abs(f1.full - f2.full)), np.max(np.abs(w1.full - w2.full)))
    record(2, worst_design <= 1e-9 and worst_channel <= 1e-9,
           f"max |R-HYB - NR-HYB| = {worst_design:.1e}, max |H^e - H| = {worst_channel:.1e} over 20 seeds (<=1e-9)")


# ---------------------------------------------------------------- criterion 3


def test_c3_feasibility_suite():
    t0 = time.perf_counter()
    failures = 0
    n = 0
    for seed in range(100):
        m_t = (16, 64)[seed % 2]
        n_rf = (2, 4)[(seed // 2) % 2]
        tx, rx = ArrayGeometry(m_t), ArrayGeometry(m_t // 2)
        rng = np.random.default_rng(seed)
        paths = draw_paths(10, 1.0, PAPER, PAPER, rng)
        inputs = DesignInputs(paths, tx, rx, 2, n_rf, n_rf, PAPER, PAPER, build_channel(paths, tx, rx).matrix)
        design = design_robust if seed % 4 < 2 else design_nonrobust
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            f, w, diag = design(inputs, rng=rng, diagnostics=True)
        D = w.digital_second.conj().T @ diag.effective @ f.digital_second
        ok = (
            np.max(np.abs(np.abs(f.analog) - 1 / math.sqrt(m_t))) <= 1e-12
            and np.max(np.abs(np.abs(w.analog) - 1 / math.sqrt(m_t // 2))) <= 1e-12
            and abs(np.linalg.norm(f.analog @ f.digital) ** 2 - 2) <= 1e-9
            and np.max(np.abs(D - np.diag(np.diag(D)))) <= 1e-9 * diag.singular_values[0]
        )
        failures += not ok
        n += 1
    elapsed = time.perf_counter() - t0
    record(3, failures == 0 and elapsed < 60, f"{n - failures}/{n} designs feasible, power-normalised and diagonalising; {elapsed:.1f}s")


# ---------------------------------------------------------------- criterion 4


def test_c4_gp_solver():
    t0 = time.perf_counter()
    hits = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        B = crandn(rng, 8, 4)
        x_star = random_phase(4, 0.5, rng)
        p = CmlsProblem(B, B @ x_star, 0.5)
        x, _ = gp_solve(p, GpConfig(1e-10, 500), rng=rng)
        hits += residual(p, x) <= 1e-6

    worst_ls = 0.0
    for seed in range(50):
        rng = np.random.default_rng(1000 + seed)
        p = CmlsProblem(crandn(rng, 8, 4), crandn(rng, 8), 0.5)
        x, d = crandn(rng, 4), crandn(rng, 4)
        ref = minimize_scalar(lambda a: residual(p, x + a * d), bracket=(-1.0, 1.0), method="golden", tol=1e-12).x
        worst_ls = max(worst_ls, abs(line_search_step(p, x, d) - ref) / max(1.0, abs(ref)))

    rng = np.random.default_rng(7)
    f = crandn(rng, 16)
    x, _ = gp_solve(CmlsProblem(np.eye(16), f, 0.25), GpConfig(1e-12, 50), rng=rng)
    proj_err = np.max(np.abs(x - 0.25 * np.exp(1j * np.angle(f))))
    elapsed = time.perf_counter() - t0
    record(
        4,
        hits >= 90 and worst_ls <= 1e-6 and proj_err <= 1e-12 and elapsed < 60,
        f"planted recovery {hits}/100 (>=90); line search vs golden section {worst_ls:.1e} (<=1e-6); "
        f"B=I projection error {proj_err:.1e}; {elapsed:.1f}s",
    )


# ---------------------------------------------------------------- criteria 5 and 7


def fig2_config():
    return SystemConfig(
        m_t=32, m_r=16, n_s=2, num_paths=10, delta_std_deg=PAPER_DELTA_DEG,
        snr_db_list=[0.0], n_rf_list=[2, 4, 6], trials=300, seed=SEED,
    )


@pytest.fixture(scope="module")
def fig2_run(tmp_path_factory):
    config = fig2_config()
    t0 = time.perf_counter()
    samples = sweep_samples(config)
    elapsed = time.perf_counter() - t0
    csv_path = emit_csv(summarize(config, samples), tmp_path_factory.mktemp("fig2") / "run1.csv")
    return config, samples, csv_path, elapsed


@pytest.mark.slow
def test_c5_fig2_trend(fig2_run):
    config, samples, _, elapsed = fig2_run
    parts = []
    ok = elapsed < 600
    for (rf, _), per in samples.items():
        gap = per["R-HYB"] - per["NR-HYB"]
        lower = gap.mean() - 1.6449 * gap.std(ddof=1) / math.sqrt(len(gap))
        ok &= gap.mean() > 0 and lower >= 0
        parts.append(f"N_RF={rf[0]}: R-HYB {per['R-HYB'].mean():.3f} vs NR-HYB {per['NR-HYB'].mean():.3f} (95% lower bound on gap {lower:+.3f})")
    record(5, ok, "; ".join(parts) + f"; {elapsed:.0f}s")


@pytest.mark.slow
def test_c7_determinism(fig2_run, tmp_path):
    config, _, first, _ = fig2_run
    second = emit_csv(summarize(config, sweep_samples(config)), tmp_path / "run2.csv")
    same = first.read_bytes() == second.read_bytes()
    record(7, same, f"two seeded runs of the criterion-5 sweep give {'byte-identical' if same else 'DIFFERENT'} CSVs")


# ---------------------------------------------------------------- criterion 6


def snr_to_reach(snr, curve, level):
    """SNR at which a (monotone) mean-SE curve reaches ``level``, linearly extrapolated past the ends."""
    snr, curve = np.asarray(snr, float), np.asarray(curve, float)
    if level <= curve[0]:
        i = 0
    elif level >= curve[-1]:
        i = len(curve) - 2
    else:
        i = int(np.searchsorted(curve, level)) - 1
    slope = (curve[i + 1] - curve[i]) / (snr[i + 1] - snr[i])
    return snr[i] + (level - curve[i]) / slope


@pytest.mark.slow
def test_c6_fig3_trend():
    config = SystemConfig(
        m_t=128, m_r=72, n_s=4, n_rf_t=8, n_rf_r=8, num_paths=10, delta_std_deg=PAPER_DELTA_DEG,
        snr_db_list=[-10, -5, 0, 5, 10], trials=1000, seed=SEED,
    )
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        samples = sweep_samples(config)
    elapsed = time.perf_counter() - t0
    snrs = list(config.snr_db_list)
    mean = {s: np.array([samples[((8, 8), snr)][s].mean() for snr in snrs]) for s in config.schemes}

    upper = snrs[len(snrs) - len(snrs) // 2:]
    gains = [snr_to_reach(snrs, mean["NR-HYB"], mean["R-HYB"][snrs.index(s)]) - s for s in upper]
    order_ok = all(
        mean["NR-DB"][k] >= max(mean["R-DB"][k], mean["R-HYB"][k]) >= mean["NR-HYB"][k] for k in range(len(snrs))
    )
    table = ", ".join(
        f"{s:+g}dB: " + "/".join(f"{mean[n][k]:.2f}" for n in ("R-HYB", "NR-HYB", "R-DB", "NR-DB"))
        for k, s in enumerate(snrs)
    )
    record(
        6,
        min(gains) >= 1.0 and order_ok,
        f"128x72, 1000 trials: SNR gain of R-HYB over NR-HYB at {upper} dB = "
        f"{', '.join(f'{g:.2f}' for g in gains)} dB (>=1); ordering NR-DB >= max(R-DB, R-HYB) >= NR-HYB "
        f"{'holds' if order_ok else 'VIOLATED'}; mean SE R-HYB/NR-HYB/R-DB/NR-DB {table}; {elapsed / 60:.1f} min",
    )
