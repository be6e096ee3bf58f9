"""Multivariate Laurent polynomials and their fraction fields.

One arithmetic kernel serves both coefficient rings the models need:
polynomials in h₁,…,hₙ over Fraction and Laurent polynomials in the torus
variables K₁,…,Kₙ over QScalar.  An MLaurent is a finite map from integer
exponent vectors (length n tuples) to nonzero scalars; ordinary polynomials
are the non-negative-exponent special case.

PolyFrac is the fraction field.  Canonical form: common monomial units are
cleared so numerator and denominator are honest polynomials, their gcd is
divided out, and the denominator is made monic with respect to lexicographic
order.  Equality is then structural, and a/b == c/d iff a·d == c·b.

The gcd is a primitive PRS in the highest occurring variable, recursing on
contents.  Scalars form a field, so no integer-content bookkeeping is needed
beyond what the recursion does.
"""

from __future__ import annotations

from fractions import Fraction

from .qq import QScalar

__all__ = [
    "MLaurent",
    "PolyFrac",
    "poly_gcd",
    "poly_div_exact",
    "jacobian",
    "det_poly",
    "rank_over_fractions",
]

_SCALARS = (int, Fraction, QScalar)


class MLaurent:
    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms=None):
        clean = {}
        if terms:
            for exp, c in terms.items():
                if c:
                    exp = tuple(exp)
                    assert len(exp) == n, "exponent vector has wrong length"
                    clean[exp] = c
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, *a):
        raise AttributeError("MLaurent is immutable")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(n: int) -> "MLaurent":
        return MLaurent(n, {})

    @staticmethod
    def const(n: int, c) -> "MLaurent":
        return MLaurent(n, {(0,) * n: c})

    @staticmethod
    def var(n: int, i: int, exp: int = 1, one=Fraction(1)) -> "MLaurent":
        e = [0] * n
        e[i] = exp
        return MLaurent(n, {tuple(e): one})

    @staticmethod
    def monomial(n: int, exp, coeff) -> "MLaurent":
        return MLaurent(n, {tuple(exp): coeff})

    # -- structure queries -------------------------------------------------

    def __bool__(self):
        return bool(self.terms)

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def single_term(self):
        assert len(self.terms) == 1
        return next(iter(self.terms.items()))

    def is_const(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and not any(next(iter(self.terms))))

    def const_value(self):
        assert self.is_const()
        return next(iter(self.terms.values())) if self.terms else 0

    def deg_in(self, i: int):
        return max((e[i] for e in self.terms), default=None)

    def min_deg_in(self, i: int):
        return min((e[i] for e in self.terms), default=None)

    def total_degree(self):
        return max((sum(e) for e in self.terms), default=None)

    def is_laurent(self) -> bool:
        return any(x < 0 for e in self.terms for x in e)

    def vars_present(self):
        return sorted({i for e in self.terms for i in range(self.n) if e[i]})

    def leading_lex(self):
        """(exponent, coefficient) of the lex-largest term; None for zero."""
        if not self.terms:
            return None
        e = max(self.terms)
        return e, self.terms[e]

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, MLaurent):
            assert other.n == self.n, "mixed variable counts"
            return other
        if isinstance(other, _SCALARS):
            return MLaurent.const(self.n, other)
        return None

    def __eq__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self.terms == other.terms

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return MLaurent(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return MLaurent(self.n, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, _SCALARS):
            if not other:
                return MLaurent.zero(self.n)
            return MLaurent(self.n, {e: c * other for e, c in self.terms.items()})
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        a, b = self.terms, other.terms
        if len(a) > len(b):
            a, b = b, a
        out = {}
        for ea, ca in a.items():
            for eb, cb in b.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                s = out.get(e, 0) + ca * cb
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        return MLaurent(self.n, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            assert self.is_monomial(), "negative power of a non-monomial"
            e, c = self.single_term()
            inv = MLaurent.monomial(self.n, tuple(-x for x in e), _scalar_inv(c))
            return inv ** (-k)
        out = None
        base = self
        while True:
            if k & 1:
                out = base if out is None else out * base
            k >>= 1
            if not k:
                break
            base = base * base
        if out is None:
            some = next(iter(self.terms.values()), Fraction(1))
            one = _scalar_one(some)
            return MLaurent.const(self.n, one)
        return out

    def shift_exponents(self, vec) -> "MLaurent":
        """Multiply by the unit monomial with exponent vector ``vec``."""
        vec = tuple(vec)
        return MLaurent(self.n, {tuple(x + y for x, y in zip(e, vec)): c for e, c in self.terms.items()})

    def derivative(self, i: int) -> "MLaurent":
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                e2 = list(e)
                e2[i] -= 1
                out[tuple(e2)] = c * e[i]
        return MLaurent(self.n, out)

    def substitute(self, values) -> "MLaurent":
        """Polynomial composition v_i ↦ values[i]; exponents must be non-negative."""
        assert not self.is_laurent(), "substitution into Laurent exponents"
        values = list(values)
        assert len(values) == self.n
        m = values[0].n if values else self.n
        out = MLaurent.zero(m)
        cache = {}
        for e, c in self.terms.items():
            term = MLaurent.const(m, c)
            for i, k in enumerate(e):
                if k:
                    if (i, k) not in cache:
                        cache[(i, k)] = values[i] ** k
                    term = term * cache[(i, k)]
            out = out + term
        return out

    def evaluate(self, point):
        """Evaluate at concrete scalars (test oracle; negative exponents need nonzero entries)."""
        total = None
        for e, c in self.terms.items():
            v = c
            for i, k in enumerate(e):
                if k:
                    v = v * point[i] ** k
            total = v if total is None else total + v
        return total if total is not None else Fraction(0)

    # -- display -----------------------------------------------------------

    def to_str(self, names=None) -> str:
        if not self.terms:
            return "0"
        names = names or [f"v{i+1}" for i in range(self.n)]
        parts = []
        for e in sorted(self.terms, reverse=True):
            c = self.terms[e]
            factors = []
            for i, k in enumerate(e):
                if k == 1:
                    factors.append(names[i])
                elif k:
                    factors.append(f"{names[i]}^{k}")
            cs = str(c)
            if factors and cs == "1":
                body = "*".join(factors)
            elif factors and cs == "-1":
                body = "-" + "*".join(factors)
            else:
                if not isinstance(c, (int, Fraction)) and ("+" in cs or " - " in cs or "/" in cs):
                    cs = f"({cs})"
                body = "*".join([cs] + factors)
            parts.append(body)
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out

    def __repr__(self):
        return self.to_str()


def _scalar_one(sample):
    if isinstance(sample, QScalar):
        return QScalar((1,))
    return Fraction(1)


def _scalar_inv(c):
    if isinstance(c, int):
        return Fraction(1, c)
    if isinstance(c, Fraction):
        return 1 / c
    return c.inverse()


# -- polynomial gcd (non-negative exponents, field scalars) -----------------


def _coeffs_in(p: MLaurent, v: int):
    """Split p by the power of variable v: {k: coefficient poly with v-exponent 0}."""
    out = {}
    for e, c in p.terms.items():
        k = e[v]
        e2 = list(e)
        e2[v] = 0
        bucket = out.setdefault(k, {})
        bucket[tuple(e2)] = c
    return {k: MLaurent(p.n, t) for k, t in out.items()}


def _from_coeffs(n: int, coeffs, v: int) -> MLaurent:
    out = {}
    for k, poly in coeffs.items():
        for e, c in poly.terms.items():
            e2 = list(e)
            e2[v] += k
            out[tuple(e2)] = c
    return MLaurent(n, out)


def poly_div_exact(a: MLaurent, b: MLaurent) -> MLaurent:
    """Exact quotient a/b; raises ArithmeticError when b does not divide a."""
    assert b, "division by the zero polynomial"
    if not a:
        return MLaurent.zero(a.n)
    quo = {}
    rem = a
    eb, cb = b.leading_lex()
    while rem:
        er, cr = rem.leading_lex()
        de = tuple(x - y for x, y in zip(er, eb))
        if any(x < 0 for x in de):
            raise ArithmeticError("inexact polynomial division")
        qc = cr / cb if not isinstance(cr, int) else Fraction(cr) / cb
        quo[de] = qc
        rem = rem - b * MLaurent.monomial(a.n, de, qc)
    return MLaurent(a.n, quo)


def _prem(f: MLaurent, g: MLaurent, v: int) -> MLaurent:
    """Pseudo-remainder of f by g in variable v (up to units, which the PRS strips)."""
    dg = g.deg_in(v) or 0
    gc = _coeffs_in(g, v)
    lg = gc[dg]
    r = f
    while r and (r.deg_in(v) or 0) >= dg:
        rc = _coeffs_in(r, v)
        dr = max(rc)
        lr = rc[dr]
        r = r * lg - g * lr.shift_exponents(tuple(dr - dg if i == v else 0 for i in range(f.n)))
    return r


def _content_in(p: MLaurent, v: int) -> MLaurent:
    cs = _coeffs_in(p, v)
    g = MLaurent.zero(p.n)
    for poly in cs.values():
        g = poly_gcd(g, poly)
    return g


def _monic_lex(p: MLaurent) -> MLaurent:
    if not p:
        return p
    _, c = p.leading_lex()
    one = _scalar_one(c)
    if c == one:
        return p
    return p * _scalar_inv(c)


def poly_gcd(a: MLaurent, b: MLaurent) -> MLaurent:
    """Gcd of ordinary polynomials over a field, monic under lex order."""
    assert not a.is_laurent() and not b.is_laurent(), "gcd needs non-negative exponents"
    if not a:
        return _monic_lex(b)
    if not b:
        return _monic_lex(a)
    if a.is_const() or b.is_const():
        # nonzero constants are units of the coefficient field
        return MLaurent.const(a.n, _scalar_one(next(iter(a.terms.values()))))
    avars = {i for e in a.terms for i in range(a.n) if e[i]}
    bvars = {i for e in b.terms for i in range(b.n) if e[i]}
    common = sorted(avars | bvars)
    if not common:
        return MLaurent.const(a.n, _scalar_one(next(iter(a.terms.values()))))
    v = common[-1]
    if (a.deg_in(v) or 0) == 0 or (b.deg_in(v) or 0) == 0:
        # v occurs in only one argument: gcd cannot involve v
        ca = _content_in(a, v) if (a.deg_in(v) or 0) else a
        cb = _content_in(b, v) if (b.deg_in(v) or 0) else b
        return poly_gcd(ca, cb)
    ca, cb = _content_in(a, v), _content_in(b, v)
    pa, pb = poly_div_exact(a, ca), poly_div_exact(b, cb)
    cg = poly_gcd(ca, cb)
    f, g = (pa, pb) if (pa.deg_in(v) or 0) >= (pb.deg_in(v) or 0) else (pb, pa)
    while True:
        dg = g.deg_in(v) or 0
        if dg == 0:
            part = None  # coprime in v
            break
        r = _prem(f, g, v)
        if not r:
            part = poly_div_exact(g, _content_in(g, v))
            break
        if (r.deg_in(v) or 0) == 0:
            part = None
            break
        f, g = g, poly_div_exact(r, _content_in(r, v))
    return _monic_lex(cg if part is None else cg * part)


# -- fraction field ----------------------------------------------------------


class PolyFrac:
    __slots__ = ("num", "den")

    def __init__(self, num: MLaurent, den: MLaurent):
        assert num.n == den.n, "mixed variable counts"
        if not den:
            raise ZeroDivisionError("zero denominator polynomial")
        n = num.n
        # clear monomial units so both parts are honest polynomials
        shift = []
        for i in range(n):
            lows = [m for m in (num.min_deg_in(i), den.min_deg_in(i)) if m is not None]
            shift.append(-min(min(lows), 0) if lows else 0)
        if any(shift):
            num = num.shift_exponents(shift)
            den = den.shift_exponents(shift)
        if num:
            if not den.is_const():
                g = poly_gcd(num, den)
                if not g.is_const():
                    num = poly_div_exact(num, g)
                    den = poly_div_exact(den, g)
            _, lc = den.leading_lex()
            one = _scalar_one(lc)
            if lc != one:
                inv = _scalar_inv(lc)
                num = num * inv
                den = den * inv
        else:
            some = next(iter(den.terms.values()))
            den = MLaurent.const(n, _scalar_one(some))
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, *a):
        raise AttributeError("PolyFrac is immutable")

    @staticmethod
    def from_poly(p: MLaurent) -> "PolyFrac":
        some = next(iter(p.terms.values()), Fraction(1))
        return PolyFrac(p, MLaurent.const(p.n, _scalar_one(some)))

    @property
    def n(self):
        return self.num.n

    def _coerce(self, other):
        if isinstance(other, PolyFrac):
            return other
        if isinstance(other, MLaurent):
            return PolyFrac.from_poly(other)
        if isinstance(other, _SCALARS):
            return PolyFrac.from_poly(MLaurent.const(self.n, other))
        return None

    def __bool__(self):
        return bool(self.num)

    def __eq__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return PolyFrac(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return PolyFrac(-self.num, self.den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return PolyFrac(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if not other.num:
            raise ZeroDivisionError("division by the zero fraction")
        return PolyFrac(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other / self

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = PolyFrac.from_poly(MLaurent.const(self.n, _scalar_one(next(iter(self.den.terms.values())))))
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def inverse(self) -> "PolyFrac":
        if not self.num:
            raise ZeroDivisionError("inverting the zero fraction")
        return PolyFrac(self.den, self.num)

    def is_polynomial(self) -> bool:
        return self.den.is_const()

    def is_monomial_unit(self) -> bool:
        return self.num.is_monomial() and self.den.is_monomial()

    def as_laurent(self) -> MLaurent:
        """Convert back to a Laurent polynomial; denominator must be a monomial."""
        assert self.den.is_monomial(), "denominator is not a unit monomial"
        e, c = self.den.single_term()
        return self.num.shift_exponents(tuple(-x for x in e)) * _scalar_inv(c)

    def evaluate(self, point):
        return self.num.evaluate(point) / self.den.evaluate(point)

    def to_str(self, names=None) -> str:
        if self.is_polynomial():
            c = self.den.const_value()
            p = self.num if c == _scalar_one(c) else self.num * _scalar_inv(c)
            return p.to_str(names)
        ns, ds = self.num.to_str(names), self.den.to_str(names)
        if len(self.num.terms) > 1:
            ns = f"({ns})"
        if len(self.den.terms) > 1:
            ds = f"({ds})"
        return f"{ns}/{ds}"

    def __repr__(self):
        return self.to_str()


# -- calculus and exact linear algebra ---------------------------------------


def jacobian(fs) -> list:
    """Matrix of formal partials ∂f_i/∂v_j for a square system."""
    fs = list(fs)
    n = fs[0].n
    assert all(f.n == n for f in fs) and len(fs) == n, "system is not square"
    return [[f.derivative(j) for j in range(n)] for f in fs]


def det_poly(matrix) -> MLaurent:
    """Exact determinant by cofactor expansion; fine at the ranks we meet."""
    m = len(matrix)
    if m == 1:
        return matrix[0][0]
    n = matrix[0][0].n
    total = MLaurent.zero(n)
    for j in range(m):
        minor = [row[:j] + row[j + 1 :] for row in matrix[1:]]
        term = matrix[0][j] * det_poly(minor)
        total = total + (term if j % 2 == 0 else -term)
    return total


def rank_over_fractions(matrix) -> int:
    """Rank of a matrix of PolyFrac entries by Gaussian elimination."""
    rows = [list(r) for r in matrix]
    rank = 0
    col = 0
    ncols = len(rows[0]) if rows else 0
    while rank < len(rows) and col < ncols:
        piv = next((r for r in range(rank, len(rows)) if rows[r][col]), None)
        if piv is None:
            col += 1
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = rows[rank][col].inverse()
        rows[rank] = [x * inv for x in rows[rank]]
        for r in range(len(rows)):
            if r != rank and rows[r][col]:
                factor = rows[r][col]
                rows[r] = [a - factor * b for a, b in zip(rows[r], rows[rank])]
        rank += 1
        col += 1
    return rank
