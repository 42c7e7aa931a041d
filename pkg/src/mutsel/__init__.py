"""Static mutant selection toolkit: MiniC frontend, mutation engine,
trivial-equivalence detection, static mutant features, boosted-tree
learners, selection/prioritization strategies, and the evaluation
machinery (kill matrices, simulations, metrics, statistics).
"""

__version__ = "0.1.0"
