from .config import SCHEMES, ConfigError, SystemConfig, load_config
from .metrics import NumericalDegeneracy, spectral_efficiency
from .sweep import SweepResult, design_trial, emit_csv, read_csv, run_sweep, run_trial, summarize, sweep_samples
