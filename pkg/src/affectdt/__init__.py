"""Affective decision theory: behavioral probabilities, paradox fixtures,
agent networks and measurement identities."""

from .attraction import AttractivenessRanking, attraction_from_ranking, ladder_priors
from .core import Lottery, UtilityFunction, expected_utility, gain_loss_number, mix
from .decision import DecisionProblem, assemble, preference_relation, stochastic_optimum
from .network import AgentGroup, NetworkConfig, classify_regime, simulate_continuous, simulate_discrete
from .paradox import Scenario, run_scenario
from .utility import luce_prior, utility_factor

__version__ = "0.1.0"

__all__ = [
    "AgentGroup",
    "AttractivenessRanking",
    "DecisionProblem",
    "Lottery",
    "NetworkConfig",
    "Scenario",
    "UtilityFunction",
    "assemble",
    "attraction_from_ranking",
    "classify_regime",
    "expected_utility",
    "gain_loss_number",
    "ladder_priors",
    "luce_prior",
    "mix",
    "preference_relation",
    "run_scenario",
    "simulate_continuous",
    "simulate_discrete",
    "stochastic_optimum",
    "utility_factor",
]
