# -*- coding: utf-8 -*-
"""Error types raised by kw_graph.

Every error carries an ``exit_code`` that the CLI hands back to the shell:
2 for bad input or violated preconditions, 3 when a numerical procedure
gives up (no convergence, undefined degree).
"""
from __future__ import annotations


class KWError(Exception):
    exit_code = 2


# ---- graph construction / domain ----
class GraphError(KWError):
    pass


class DisconnectedGraph(GraphError):
    pass


class NonpositiveMeasure(GraphError):
    pass


class NegativeWeight(GraphError):
    pass


class DuplicateEdge(GraphError):
    pass


class DuplicateVertex(GraphError):
    pass


class SelfLoop(GraphError):
    pass


class DomainMismatch(KWError):
    pass


class InvalidExponent(KWError):
    pass


class ProblemFormatError(KWError):
    pass


class InvalidOptions(KWError):
    pass


# ---- problem level ----
class OverflowRisk(KWError):
    pass


class NonpositiveA(KWError):
    pass


class TooFewSamples(KWError):
    pass


class PreconditionViolated(KWError):
    pass


class ClassViolation(KWError):
    pass


class NoZeroVertices(KWError):
    pass


class NonUnitMeasure(KWError):
    pass


class SingularShift(KWError):
    pass


# ---- sub/super-solutions ----
class NotSubSolution(KWError):
    pass


class NotSuperSolution(KWError):
    pass


class OrderingError(KWError):
    pass


class NoSupersolutionFound(KWError):
    def __init__(self, message: str, attempts=None):
        super().__init__(message)
        self.attempts = list(attempts or [])


# ---- numerical failure ----
class NoConvergence(KWError):
    exit_code = 3


class DegenerateRoot(KWError):
    exit_code = 3
