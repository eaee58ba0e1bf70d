"""Monte-Carlo trials and sweeps.

Every trial owns two counter-derived random streams: one for the channel
and misalignment draws (shared by all schemes and sweep points, so
comparisons are paired) and one for design-time random initialisation
(re-created per scheme, so the robust and non-robust designs consume
identical draws). Results therefore never depend on execution order or on
the number of worker processes.
"""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..array_channel import ArrayGeometry, MisalignmentModel, build_channel, draw_paths
from ..joint_design import DesignInputs, design_fully_digital, design_nonrobust, design_robust, expected_channel
from .config import SystemConfig
from .metrics import spectral_efficiency

__all__ = [
    "SweepResult",
    "trial_streams",
    "design_trial",
    "run_trial",
    "sweep_samples",
    "summarize",
    "run_sweep",
    "emit_csv",
    "read_csv",
    "CSV_HEADER",
]

log = logging.getLogger(__name__)

CSV_HEADER = ("sweep_var", "sweep_value", "scheme", "mean_se_bits_per_hz", "std_err", "trials")

_CHANNEL_STREAM = 0
_DESIGN_STREAM = 1


@dataclass(frozen=True)
class SweepResult:
    sweep_var: str
    sweep_value: float
    scheme: str
    mean_se: float
    std_error: float
    trials: int


def trial_streams(seed: int, trial_index: int, n_rf: tuple):
    """Channel generator and a factory of identical design generators for one trial."""
    channel_rng = np.random.default_rng(np.random.SeedSequence([seed, trial_index, _CHANNEL_STREAM]))
    design_seq = [seed, trial_index, _DESIGN_STREAM, *n_rf]
    return channel_rng, lambda: np.random.default_rng(np.random.SeedSequence(design_seq))


def _geometries(config: SystemConfig):
    return ArrayGeometry(config.m_t), ArrayGeometry(config.m_r)


def design_trial(config: SystemConfig, n_rf: tuple, trial_index: int):
    """Draw the trial's channel and design every requested scheme.

    Returns ``(H, designs)`` where ``designs`` maps scheme name to the full
    ``(F, W)`` matrices.
    """
    tx, rx = _geometries(config)
    model = MisalignmentModel.from_degrees(config.delta_std_deg)
    channel_rng, design_rng = trial_streams(config.seed, trial_index, n_rf)
    paths = draw_paths(config.num_paths, config.gain_variance, model, model, channel_rng)
    H = build_channel(paths, tx, rx).matrix
    inputs = DesignInputs(paths, tx, rx, config.n_s, n_rf[0], n_rf[1], model, model, H)
    dcfg = config.design_config()

    designs = {}
    for scheme in config.schemes:
        if scheme == "R-HYB":
            f, w = design_robust(inputs, dcfg, design_rng())
            designs[scheme] = (f.full, w.full)
        elif scheme == "NR-HYB":
            f, w = design_nonrobust(inputs, dcfg, design_rng())
            designs[scheme] = (f.full, w.full)
        elif scheme == "R-DB":
            designs[scheme] = design_fully_digital(expected_channel(paths, tx, rx, model, model), config.n_s)
        elif scheme == "NR-DB":
            designs[scheme] = design_fully_digital(H, config.n_s)
    return H, designs


def _evaluate(config: SystemConfig, H, designs, snr_db: float) -> dict:
    noise_var = 10.0 ** (-snr_db / 10.0)
    return {
        name: spectral_efficiency(H, F, W, noise_var, config.total_power, config.n_s)
        for name, (F, W) in designs.items()
    }


def run_trial(config: SystemConfig, snr_db: float, n_rf, trial_index: int) -> dict:
    """Spectral efficiency of every scheme for one channel draw at one operating point."""
    n_rf = (n_rf, n_rf) if np.isscalar(n_rf) else tuple(n_rf)
    H, designs = design_trial(config, n_rf, trial_index)
    return _evaluate(config, H, designs, snr_db)


def _trial_block(args):
    """All SNR points of one (RF point, trial); worker-process entry point."""
    config, n_rf, trial_index = args
    H, designs = design_trial(config, n_rf, trial_index)
    return [_evaluate(config, H, designs, snr) for snr in config.snr_db_list]


def _mainlobe_warnings(config: SystemConfig):
    model = MisalignmentModel.from_degrees(config.delta_std_deg)
    for geom in _geometries(config):
        model.check_mainlobe(geom)


def sweep_samples(config: SystemConfig, workers: int = 1, trial_order=None, progress=None) -> dict:
    """Per-trial spectral efficiencies for every sweep point.

    Returns ``{(rf_point, snr_db): {scheme: array of length trials}}`` with
    arrays indexed by trial index.

    Parameters
    ----------
    workers : int
        Worker processes; 1 runs in-process.
    trial_order : sequence of int, optional
        Execution order of trial indices (a permutation of ``range(trials)``).
        Only useful to demonstrate order independence.
    progress : callable, optional
        Called with the number of finished trial blocks (in-process runs only).
    """
    _mainlobe_warnings(config)
    order = list(range(config.trials)) if trial_order is None else list(trial_order)
    if sorted(order) != list(range(config.trials)):
        raise ValueError("trial_order must be a permutation of range(trials)")

    rf_points = config.rf_points()
    jobs = [(config, rf, t) for rf in rf_points for t in order]
    log.info("running %d trial blocks (%d RF points x %d trials) on %d worker(s)", len(jobs), len(rf_points), config.trials, workers)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(_trial_block, jobs, chunksize=max(1, len(jobs) // (8 * workers))))
    else:
        outputs = []
        for job in jobs:
            outputs.append(_trial_block(job))
            if progress is not None:
                progress(len(outputs))

    # merged by (rf point, trial index), so execution order is irrelevant
    by_trial = {(rf, t): out for (_, rf, t), out in zip(jobs, outputs)}
    samples = {}
    for rf in rf_points:
        for k, snr in enumerate(config.snr_db_list):
            samples[(rf, snr)] = {
                scheme: np.array([by_trial[(rf, t)][k][scheme] for t in range(config.trials)])
                for scheme in config.schemes
            }
    return samples


def summarize(config: SystemConfig, samples: dict) -> list:
    var = config.sweep_variable
    results = []
    for (rf, snr), per_scheme in samples.items():
        value = snr if var == "snr_db" else float(rf[0])
        for scheme, x in per_scheme.items():
            std_err = float(np.std(x, ddof=1) / math.sqrt(len(x))) if len(x) > 1 else 0.0
            results.append(SweepResult(var, float(value), scheme, float(np.mean(x)), std_err, len(x)))
    return results


def run_sweep(config: SystemConfig, workers: int = 1, trial_order=None, progress=None) -> list:
    """Mean and standard error of every scheme at every sweep point (see :func:`sweep_samples`)."""
    return summarize(config, sweep_samples(config, workers, trial_order, progress))


def _sort_key(r: SweepResult):
    return (r.sweep_var, r.sweep_value, r.scheme)


def emit_csv(results, path) -> Path:
    """Write results sorted by sweep value then scheme name; floats use ``repr`` precision."""
    path = Path(path)
    rows = sorted(results, key=_sort_key)
    try:
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for r in rows:
                writer.writerow([r.sweep_var, repr(r.sweep_value), r.scheme, repr(r.mean_se), repr(r.std_error), r.trials])
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write results to {path}: {exc.strerror}") from None
    return path


def read_csv(path) -> list:
    with Path(path).open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        return [
            SweepResult(
                row["sweep_var"],
                float(row["sweep_value"]),
                row["scheme"],
                float(row["mean_se_bits_per_hz"]),
                float(row["std_err"]),
                int(row["trials"]),
            )
            for row in reader
        ]
