"""3XOR solvers: brute force, XOR-ordered trie, randomized packed fingerprints,
and reductions to offline set problems."""

from .core import (InstanceError, SolutionTriple, XorInstance, brute_force_solve,
                   count_all_solutions, generate_instance, parse_instance, format_instance)
from .xortrie import make_tree, solve_quadratic, traverse
from .randomized import choose_plan, solve_randomized
from ._backend import HAVE_NATIVE, backend_name

__version__ = "0.1.0"

__all__ = [
    "InstanceError", "SolutionTriple", "XorInstance", "brute_force_solve",
    "count_all_solutions", "generate_instance", "parse_instance", "format_instance",
    "make_tree", "solve_quadratic", "traverse", "choose_plan", "solve_randomized",
    "HAVE_NATIVE", "backend_name",
]
