from .cmsc import (Algo2Params, GameState2, algo2_inner_max, algo2_t_step, design_cmsc,
                   randomize_cm, relaxed_game_value, relaxed_objective, run_algo2, tir_gram)
from .common import worst_case_tir
from .ec import design_ec
from .scsc import (Algo3Params, InfeasibleError, MmState, design_scsc, feasible_init,
                   initial_waveform, minorizer_gram, minorizer_value, mm_step)
from .verify import NashReport, maxmin_oracle, verify_nash_ec

__all__ = [
    "Algo2Params", "Algo3Params", "GameState2", "InfeasibleError", "MmState", "NashReport",
    "algo2_inner_max", "algo2_t_step", "design_cmsc", "design_ec", "design_scsc", "feasible_init",
    "initial_waveform", "maxmin_oracle", "minorizer_gram", "minorizer_value", "mm_step",
    "randomize_cm", "relaxed_game_value", "relaxed_objective", "run_algo2", "tir_gram",
    "verify_nash_ec", "worst_case_tir",
]
