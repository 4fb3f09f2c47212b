"""Repairing untrustworthy labels on bipartite graphs."""
from .base import BaseRepairer, TrivialRepairer, Verdict, check_graph, trivial_baseline, verdict_kinds
from .evaluation import ConfusionReport, aggregate, judge
from .generators import GenParams, generate
from .gradient import GradientRepairer
from .graph import WILD, BipartiteGraph, GroundTruth, build_graph
from .harmonic import HarmonicRepairer
from .metrics import difficulty, snr_2path, snr_estimate
from .mincut import MinCutRepairer
from .multinomial import MultinomialRepairer
from .naive_bayes import NaiveBayesRepairer
from .voting import VotingRepairer

ALGORITHMS = {
    cls.name: cls
    for cls in (TrivialRepairer, VotingRepairer, GradientRepairer, MinCutRepairer,
                NaiveBayesRepairer, HarmonicRepairer, MultinomialRepairer)
}


class UnknownAlgorithm(KeyError):
    pass


def make_repairer(name: str, **params) -> BaseRepairer:
    try:
        cls = ALGORITHMS[name]
    except KeyError:
        raise UnknownAlgorithm(name) from None
    return cls(**params)


__all__ = [
    "ALGORITHMS", "WILD", "BaseRepairer", "BipartiteGraph", "ConfusionReport",
    "GenParams", "GradientRepairer", "GroundTruth", "HarmonicRepairer",
    "MinCutRepairer", "MultinomialRepairer", "NaiveBayesRepairer",
    "TrivialRepairer", "UnknownAlgorithm", "Verdict", "VotingRepairer",
    "aggregate", "build_graph", "check_graph", "difficulty", "generate",
    "judge", "make_repairer", "snr_2path", "snr_estimate", "trivial_baseline",
    "verdict_kinds",
]
