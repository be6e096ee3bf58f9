"""Exact arithmetic in skew Laurent models Frac(A)#T^n.

Elements are finite sums Σ f_m·t^m with torus exponents m ∈ ℤⁿ and
coefficients f_m in a commutative base, multiplied by the twist rule
(f·t^m)(g·t^{m'}) = f·σ^m(g)·t^{m+m'} for commuting automorphisms σ_i.

Two context flavours cover both model families:

* classical — coefficients are PolyFrac over h₁..hₙ with Fraction scalars;
  σ_i shifts h_j by a_ji.  The full fraction field is the localization: every
  nonzero coefficient is invertible because the σ_i are automorphisms, and
  each inversion is logged so reports can exhibit the smaller Ore set a
  statement actually needs.
* quantum — coefficients are Laurent polynomials in K₁..Kₙ over QScalar;
  σ_i scales K_j by q^{-d_i·a_ij}.  Arithmetic stays in Laurent form; only
  unit monomials are invertible here, which is all the maps require.

The denominator log is append-only and mergeable; everything else is
immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .cartan import CartanMatrix
from .exact import (
    EndoSpec,
    MLaurent,
    PolyFrac,
    QQ_ONE,
    QScalar,
    apply_endo,
    q_power,
)

__all__ = [
    "DenominatorLog",
    "ModelContext",
    "SkewElem",
    "classical_context",
    "quantum_context",
    "twisted_diff",
    "directional_diff",
    "q_divided_diff",
    "commutator",
    "ad_power",
    "ad_q",
    "ad_q_iterated",
    "conjugate",
]


@dataclass
class DenominatorLog:
    """Multiplicative record of inverted unit monomials (coefficient, torus exponent)."""

    entries: list = field(default_factory=list)

    def record(self, coeff, torus_exp):
        self.entries.append((coeff, tuple(torus_exp)))

    def merge(self, other: "DenominatorLog") -> "DenominatorLog":
        return DenominatorLog(self.entries + other.entries)

    def __len__(self):
        return len(self.entries)


class ModelContext:
    def __init__(self, kind: str, matrix: CartanMatrix, sigma, d=None):
        assert kind in ("classical", "quantum")
        self.kind = kind
        self.matrix = matrix
        self.n = matrix.n
        self.sigma = tuple(sigma)
        self.d = tuple(d) if d is not None else None
        self.denominator_log = DenominatorLog()
        self._power_cache: dict = {}
        for s in self.sigma:
            assert s.n == self.n
        self._check_commuting()

    def _check_commuting(self):
        # the twist rule needs σ_iσ_j = σ_jσ_i; confirm on every generator
        for i in range(self.n):
            for j in range(i + 1, self.n):
                for k in range(self.n):
                    g = self.coeff_var(k)
                    ij = self.apply(i, self.apply(j, g))
                    ji = self.apply(j, self.apply(i, g))
                    assert ij == ji, f"automorphisms {i} and {j} do not commute"

    # -- coefficient ring --------------------------------------------------

    def coeff_zero(self):
        if self.kind == "classical":
            return PolyFrac.from_poly(MLaurent.zero(self.n))
        return MLaurent.zero(self.n)

    def coeff_one(self):
        if self.kind == "classical":
            return PolyFrac.from_poly(MLaurent.const(self.n, Fraction(1)))
        return MLaurent.const(self.n, QQ_ONE)

    def coeff_var(self, i: int, exp: int = 1):
        """h_i (classical) or K_i^exp (quantum)."""
        if self.kind == "classical":
            assert exp >= 0, "h-variables are not invertible as polynomials"
            return PolyFrac.from_poly(MLaurent.var(self.n, i, exp))
        return MLaurent.var(self.n, i, exp, one=QQ_ONE)

    def coeff_scalar(self, c):
        if self.kind == "classical":
            return PolyFrac.from_poly(MLaurent.const(self.n, Fraction(c)))
        return MLaurent.const(self.n, c if isinstance(c, QScalar) else QScalar.from_int(c))

    def lift(self, f):
        """Accept MLaurent into a classical context by wrapping it as a fraction."""
        if self.kind == "classical" and isinstance(f, MLaurent):
            return PolyFrac.from_poly(f)
        return f

    def invert_coeff(self, f):
        if self.kind == "classical":
            if not f:
                raise ZeroDivisionError("inverting zero coefficient")
            return f.inverse()
        if not f.is_monomial():
            raise ValueError(
                "inversion supported only for unit monomials; a non-monomial "
                "quantum coefficient would need the fraction-field extension"
            )
        return f ** (-1)

    # -- automorphisms -----------------------------------------------------

    def apply(self, i: int, f):
        return apply_endo(f, self.sigma[i])

    def sigma_power(self, m) -> EndoSpec:
        m = tuple(m)
        if m not in self._power_cache:
            spec = None
            for i, k in enumerate(m):
                if k:
                    step = self.sigma[i].power(k)
                    spec = step if spec is None else spec.compose(step)
            if spec is None:
                spec = (
                    EndoSpec.shift((0,) * self.n)
                    if self.kind == "classical"
                    else EndoSpec.scale((QQ_ONE,) * self.n)
                )
            self._power_cache[m] = spec
        return self._power_cache[m]

    def apply_vec(self, m, f):
        return apply_endo(f, self.sigma_power(m))


def classical_context(matrix: CartanMatrix) -> ModelContext:
    n = matrix.n
    sigma = [
        EndoSpec.shift(tuple(Fraction(matrix[j, i]) for j in range(n))) for i in range(n)
    ]
    return ModelContext("classical", matrix, sigma)


def quantum_context(matrix: CartanMatrix, d) -> ModelContext:
    n = matrix.n
    sigma = [
        EndoSpec.scale(tuple(q_power(-d[i] * matrix[i, j]) for j in range(n)))
        for i in range(n)
    ]
    return ModelContext("quantum", matrix, sigma, d=d)


class SkewElem:
    __slots__ = ("ctx", "terms")

    def __init__(self, ctx: ModelContext, terms=None):
        clean = {}
        if terms:
            for m, f in terms.items():
                if f:
                    m = tuple(m)
                    assert len(m) == ctx.n
                    clean[m] = f
        object.__setattr__(self, "ctx", ctx)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, *a):
        raise AttributeError("SkewElem is immutable")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(ctx) -> "SkewElem":
        return SkewElem(ctx, {})

    @staticmethod
    def one(ctx) -> "SkewElem":
        return SkewElem(ctx, {(0,) * ctx.n: ctx.coeff_one()})

    @staticmethod
    def from_coeff(ctx, f) -> "SkewElem":
        return SkewElem(ctx, {(0,) * ctx.n: ctx.lift(f)})

    @staticmethod
    def monomial(ctx, f, m) -> "SkewElem":
        return SkewElem(ctx, {tuple(m): ctx.lift(f)})

    @staticmethod
    def torus(ctx, m) -> "SkewElem":
        return SkewElem(ctx, {tuple(m): ctx.coeff_one()})

    # -- predicates --------------------------------------------------------

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, SkewElem):
            return NotImplemented
        assert other.ctx is self.ctx, "context mismatch"
        return self.terms == other.terms

    def is_unit_monomial(self) -> bool:
        if len(self.terms) != 1:
            return False
        f = next(iter(self.terms.values()))
        if self.ctx.kind == "quantum":
            return f.is_monomial()
        return True  # any nonzero fraction-field coefficient is invertible

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        assert isinstance(other, SkewElem) and other.ctx is self.ctx, "context mismatch"
        out = dict(self.terms)
        for m, f in other.terms.items():
            s = out.get(m)
            s = f if s is None else s + f
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return SkewElem(self.ctx, out)

    def __neg__(self):
        return SkewElem(self.ctx, {m: -f for m, f in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "SkewElem":
        """Multiply by a central scalar or base coefficient on the left."""
        f = self.ctx.lift(c) if not isinstance(c, (int, Fraction, QScalar)) else None
        if f is not None:
            return SkewElem.from_coeff(self.ctx, f) * self
        return SkewElem(self.ctx, {m: g * c for m, g in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, QScalar)):
            return self.scale(other)
        assert isinstance(other, SkewElem) and other.ctx is self.ctx, "context mismatch"
        ctx = self.ctx
        out = {}
        for m, f in self.terms.items():
            for mp, g in other.terms.items():
                key = tuple(a + b for a, b in zip(m, mp))
                val = f * ctx.apply_vec(m, g)
                s = out.get(key)
                s = val if s is None else s + val
                if s:
                    out[key] = s
                else:
                    out.pop(key, None)
        return SkewElem(ctx, out)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, QScalar)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, k: int):
        if k < 0:
            return self.invert() ** (-k)
        out = SkewElem.one(self.ctx)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def invert(self) -> "SkewElem":
        if len(self.terms) != 1:
            raise ValueError("inversion supported only for unit monomials")
        (m, f), = self.terms.items()
        f_inv = self.ctx.invert_coeff(f)
        self.ctx.denominator_log.record(f, m)
        neg = tuple(-x for x in m)
        return SkewElem(self.ctx, {neg: self.ctx.apply_vec(neg, f_inv)})

    def to_str(self, coeff_names=None, torus_name="t") -> str:
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms):
            f = self.terms[m]
            fs = f.to_str(coeff_names)
            tor = []
            for i, k in enumerate(m):
                if k:
                    nm = torus_name if self.ctx.n == 1 else f"{torus_name}{i + 1}"
                    tor.append(nm if k == 1 else f"{nm}^{k}")
            if tor and fs == "1":
                body = "*".join(tor)
            else:
                if ("+" in fs[1:]) or (" - " in fs):
                    fs = f"({fs})"
                body = "*".join([fs] + tor)
            parts.append(body)
        return " + ".join(parts)

    def __repr__(self):
        return self.to_str()


# -- derived operators ---------------------------------------------------------


def twisted_diff(ctx: ModelContext, i: int, f):
    """D_i(f) = σ_i(f) − f on base coefficients."""
    f = ctx.lift(f)
    return ctx.apply(i, f) - f


def directional_diff(ctx: ModelContext, m, f):
    """σ^m(f) − f, the difference operator along a torus direction vector."""
    f = ctx.lift(f)
    return ctx.apply_vec(m, f) - f


def q_divided_diff(ctx: ModelContext, i: int, m: int, f, d=None):
    """Window product ∏_{ℓ=0}^{m-1}(σ_i − q^{2ℓ·d_i}) applied to f."""
    if ctx.kind != "quantum":
        raise ValueError("q_divided_diff needs a quantum context")
    d = tuple(d) if d is not None else ctx.d
    out = f
    for ell in range(m):
        out = ctx.apply(i, out) - out * q_power(2 * ell * d[i])
    return out


def commutator(a: SkewElem, b: SkewElem) -> SkewElem:
    return a * b - b * a


def ad_power(x: SkewElem, y: SkewElem, p: int) -> SkewElem:
    out = y
    for _ in range(p):
        out = commutator(x, out)
    return out


def ad_q(x: SkewElem, y: SkewElem, twist: QScalar) -> SkewElem:
    if x.ctx.kind != "quantum":
        raise ValueError("ad_q needs a quantum context")
    return x * y - (y * x) * twist


def ad_q_iterated(x: SkewElem, y: SkewElem, twists) -> SkewElem:
    """Apply ad_q repeatedly with the caller-supplied twist for each step."""
    out = y
    for tw in twists:
        out = ad_q(x, out, tw)
    return out


def conjugate(u: SkewElem, v: SkewElem) -> SkewElem:
    """Ad(u)(v) = u·v·u⁻¹ for a unit monomial u."""
    return u * v * u.invert()
