"""Tabular CFR variants and PSRO with exact exploitability.

The traversal kernels come from a compiled extension when it is built and
fall back to numpy otherwise (or when CFRPSRO_PURE_PYTHON is set);
`cfrpsro.kernels.BACKEND` says which one is active.
"""

from cfrpsro.cfr import (CfrComponents, CfrSolver, InfoStateNode,
                         PolicyAccumulator, PolicyFromRegretAccumulator,
                         RegretAccumulator, UpdateMode, average_policy,
                         instantaneous_regrets, make_components, preset,
                         regret_matching)
from cfrpsro.evolved import (AodParams, VadParams, aod_components,
                             vad_adaptive_params, vad_components)
from cfrpsro.exploitability import (BestResponseResult, best_response,
                                    exploitability)
from cfrpsro.games import GameSpec, expected_returns, new_game
from cfrpsro.kernels import BACKEND
from cfrpsro.policy import TabularPolicy
from cfrpsro.psro import (MetaGame, aggregate_policy, exact_br_oracle,
                          fill_meta_game, run_psro)

__version__ = "0.1.0"

__all__ = [
    "AodParams", "BACKEND", "BestResponseResult", "CfrComponents",
    "CfrSolver", "GameSpec", "InfoStateNode", "MetaGame", "PolicyAccumulator",
    "PolicyFromRegretAccumulator", "RegretAccumulator", "TabularPolicy",
    "UpdateMode", "VadParams", "aggregate_policy", "aod_components",
    "average_policy", "best_response", "exact_br_oracle", "expected_returns",
    "exploitability", "fill_meta_game", "instantaneous_regrets",
    "make_components", "new_game", "preset", "regret_matching", "run_psro",
    "vad_adaptive_params", "vad_components",
]
