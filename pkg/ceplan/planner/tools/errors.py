# -*- coding: utf-8 -*-
"""
planner/tools/errors.py

Exception hierarchy for the cost-efficiency planner.
The CLI maps ModelError to exit code 2 and SolverError to exit code 1.
"""


class CeplanError(Exception):
    """Base class for every planner error."""


# ============================================================================
# SOLVER
# ============================================================================

class SolverError(CeplanError, RuntimeError):
    pass


class Infeasible(SolverError):
    pass


class Unbounded(SolverError):
    pass


class NonpositiveDenominator(SolverError):
    pass


class MaxIterationsExceeded(SolverError):
    pass


# ============================================================================
# MODEL / INPUT
# ============================================================================

class ModelError(CeplanError, ValueError):
    pass


class ZeroDenominatorDirection(ModelError):
    pass


class DimensionMismatch(ModelError):
    pass


class InfeasibleBounds(ModelError):
    pass


class EmptyHistory(ModelError):
    pass


class NonpositiveMoments(ModelError):
    pass


class ZeroVolume(ModelError):
    pass


class MissingDays(ModelError):
    pass


class DegeneratePlan(ModelError):
    pass


# ============================================================================
# REAL-TIME
# ============================================================================

class RealtimeError(CeplanError):
    pass


class NoVolume(RealtimeError):
    """No volume left in the slot; the user has to permit overage."""


class UndefinedAtZeroElapsed(RealtimeError, ValueError):
    pass


class InfeasibleRebounds(RealtimeError, ValueError):
    pass


class ZeroAllocation(RealtimeError, ValueError):
    pass
