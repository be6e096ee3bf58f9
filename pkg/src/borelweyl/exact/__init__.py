"""Exact scalar and polynomial arithmetic underlying every model computation.

Mirrors one design rule: equality is decided by canonical forms, never by
evaluation at sample points.  Rationals are ``fractions.Fraction``; Q(q) and
the polynomial types live in the submodules.
"""

from fractions import Fraction as Rational

from .qq import QScalar, q_power, q_int, q_binom, QQ_ZERO, QQ_ONE
from .laurent import (
    MLaurent,
    PolyFrac,
    poly_gcd,
    poly_div_exact,
    jacobian,
    det_poly,
    rank_over_fractions,
)
from .endo import EndoSpec, apply_endo

__all__ = [
    "Rational",
    "QScalar",
    "q_power",
    "q_int",
    "q_binom",
    "QQ_ZERO",
    "QQ_ONE",
    "MLaurent",
    "PolyFrac",
    "poly_gcd",
    "poly_div_exact",
    "jacobian",
    "det_poly",
    "rank_over_fractions",
    "EndoSpec",
    "apply_endo",
]
