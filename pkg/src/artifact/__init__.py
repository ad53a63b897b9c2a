"""Parsing strategies as push-down transducers, with probabilistic extension and tabular evaluation."""

from .automaton import END, Pdt, Pop, Ppdt, Push, Swap, normalize
from .errors import ArtifactError
from .grammar import Cfg, Pcfg, Rule, make_cfg, make_pcfg
from .lifting import feasibility_analysis, lift, pdt_to_weighted_cfg, ppda_to_pcfg
from .prefix import prefix_probability, string_probability_ppdt
from .properties import check_cpp, check_spp, leadsto_relation
from .strategies import StrategyKind, construct, map_output

__all__ = [
    "END", "Pdt", "Pop", "Ppdt", "Push", "Swap", "normalize", "ArtifactError",
    "Cfg", "Pcfg", "Rule", "make_cfg", "make_pcfg",
    "feasibility_analysis", "lift", "pdt_to_weighted_cfg", "ppda_to_pcfg",
    "prefix_probability", "string_probability_ppdt",
    "check_cpp", "check_spp", "leadsto_relation",
    "StrategyKind", "construct", "map_output",
]
