"""Multiplication operators between non-commutative Orlicz and L^p spaces.

Desk-scale model: an algebra is a finite weighted direct sum of matrix
factors plus a commutative step part on intervals.  See :mod:`ncmult.cli`
for the command-line front end.
"""

from .operator_model import AlgebraModel, Factor, OperatorElement, StepFunction, TailRule, singular_values
from .orlicz import NumericConjugate, PiecewiseConvex, PowerScaled, Segment, ZeroInfinityThreshold
from .multipliers import MultiplierReport

__version__ = "0.1.0"

__all__ = [
    "AlgebraModel",
    "Factor",
    "OperatorElement",
    "StepFunction",
    "TailRule",
    "singular_values",
    "NumericConjugate",
    "PiecewiseConvex",
    "PowerScaled",
    "Segment",
    "ZeroInfinityThreshold",
    "MultiplierReport",
]
