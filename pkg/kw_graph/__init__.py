from .graph import WeightedGraph, VertexFunction, build_graph
from .model import KWProblem, Solution
from .solve import SolveOptions, newton_solve, enumerate_solutions
from .degree import degree_numeric, degree_theoretical

__version__ = "0.1.0"
