from .markov import START, MarkovModel, sample_successor, train_markov
from .search import Candidate, SearchConfig, SearchStats, evaluate_program, run_search, select_final
from .successors import generate_successors, prune

__all__ = [
    "START",
    "Candidate",
    "MarkovModel",
    "SearchConfig",
    "SearchStats",
    "evaluate_program",
    "generate_successors",
    "prune",
    "run_search",
    "sample_successor",
    "select_final",
    "train_markov",
]
