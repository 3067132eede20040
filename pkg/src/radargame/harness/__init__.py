from .config import (ConfigError, ExperimentConfig, apply_overrides, from_dict, load_config,
                     save_config)
from .experiments import (DesignBundle, design_bundle, design_tables, run_convergence, run_design,
                          run_detection_sweep, run_psd, run_pulse_compression, run_robustness)
from .selftest import SelftestReport, selftest
from .signal import autocorrelation, notch_depth_db, peak_sidelobe_db, psd
from .tables import EmitError, PlotSpec, ResultTable, emit, read_csv, to_csv

__all__ = [
    "ConfigError", "DesignBundle", "EmitError", "ExperimentConfig", "PlotSpec", "ResultTable",
    "SelftestReport", "apply_overrides", "autocorrelation", "design_bundle", "design_tables", "emit",
    "from_dict", "load_config", "notch_depth_db", "peak_sidelobe_db", "psd", "read_csv",
    "run_convergence", "run_design", "run_detection_sweep", "run_psd", "run_pulse_compression",
    "run_robustness", "save_config", "selftest", "to_csv",
]
