"""Exact arithmetic in the rational function field Q(q).

A QScalar is a reduced fraction of integer-coefficient polynomials in a
single transcendental q.  Polynomials are dense coefficient tuples with
index = exponent, so ``(−1, 0, 1)`` is q² − 1.  Canonical form: numerator
and denominator share no polynomial factor (including integer content)
and the denominator's leading coefficient is positive.  Equality is
therefore plain structural comparison; q is never specialized implicitly.

Negative powers of q are ordinary fractions here: q⁻¹ == QScalar((1,), (0, 1)).
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd as _int_gcd

__all__ = ["QScalar", "q_power", "q_int", "q_binom", "QQ_ZERO", "QQ_ONE"]

ZPoly = tuple  # dense int coefficients, no trailing zeros; () is the zero poly


def _trim(cs) -> ZPoly:
    cs = list(cs)
    while cs and cs[-1] == 0:
        cs.pop()
    return tuple(cs)


def _padd(a: ZPoly, b: ZPoly) -> ZPoly:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] += c
    return _trim(out)


def _pneg(a: ZPoly) -> ZPoly:
    return tuple(-c for c in a)


def _pmul(a: ZPoly, b: ZPoly) -> ZPoly:
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca:
            for j, cb in enumerate(b):
                if cb:
                    out[i + j] += ca * cb
    return _trim(out)


def _pcontent(a: ZPoly) -> int:
    g = 0
    for c in a:
        g = _int_gcd(g, abs(c))
    return g


def _pdiv_exact(a: ZPoly, b: ZPoly) -> ZPoly:
    # long division over Q; the caller guarantees b | a in Z[q]
    assert b, "division by zero polynomial"
    rem = [Fraction(c) for c in a]
    quo = [Fraction(0)] * max(len(a) - len(b) + 1, 0)
    lb = Fraction(b[-1])
    for k in range(len(rem) - len(b), -1, -1):
        c = rem[k + len(b) - 1] / lb
        quo[k] = c
        if c:
            for j, cb in enumerate(b):
                rem[k + j] -= c * cb
    assert all(c == 0 for c in rem), "inexact polynomial division"
    out = []
    for c in quo:
        assert c.denominator == 1, "inexact polynomial division"
        out.append(int(c))
    return _trim(out)


def _pgcd(a: ZPoly, b: ZPoly) -> ZPoly:
    """Gcd in Z[q], content included, normalized to positive leading coeff."""
    if not a:
        g = b
    elif not b:
        g = a
    else:
        ca, cb = _pcontent(a), _pcontent(b)
        # monic Euclid over Q on the primitive parts, then re-primitivize
        fa = [Fraction(c, ca) for c in a]
        fb = [Fraction(c, cb) for c in b]
        while fb and any(fb):
            # fa mod fb
            lb = fb[-1]
            for k in range(len(fa) - len(fb), -1, -1):
                c = fa[k + len(fb) - 1] / lb
                if c:
                    for j, cb2 in enumerate(fb):
                        fa[k + j] -= c * cb2
            while fa and fa[-1] == 0:
                fa.pop()
            fa, fb = fb, fa
        den_lcm = 1
        for c in fa:
            den_lcm = den_lcm * c.denominator // _int_gcd(den_lcm, c.denominator)
        ints = [int(c * den_lcm) for c in fa]
        cont = _pcontent(_trim(ints))
        g = _trim(c // cont for c in ints)
        g = _pmul((_int_gcd(ca, cb),), g)
    if g and g[-1] < 0:
        g = _pneg(g)
    return g


def _pstr(a: ZPoly) -> str:
    if not a:
        return "0"
    parts = []
    for e in range(len(a) - 1, -1, -1):
        c = a[e]
        if not c:
            continue
        if e == 0:
            term = str(abs(c))
        else:
            mag = "" if abs(c) == 1 else f"{abs(c)}*"
            term = f"{mag}q" if e == 1 else f"{mag}q^{e}"
        if not parts:
            parts.append(term if c > 0 else f"-{term}")
        else:
            parts.append(f" + {term}" if c > 0 else f" - {term}")
    return "".join(parts)


class QScalar:
    __slots__ = ("num", "den")

    def __init__(self, num, den=(1,)):
        num = _trim(num)
        den = _trim(den)
        if not den:
            raise ZeroDivisionError("QScalar denominator is the zero polynomial")
        if not num:
            den = (1,)
        else:
            g = _pgcd(num, den)
            if g != (1,):
                num = _pdiv_exact(num, g)
                den = _pdiv_exact(den, g)
            if den[-1] < 0:
                num, den = _pneg(num), _pneg(den)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, *a):
        raise AttributeError("QScalar is immutable")

    @staticmethod
    def from_int(k) -> "QScalar":
        if isinstance(k, Fraction):
            return QScalar((k.numerator,), (k.denominator,))
        return QScalar((int(k),))

    @staticmethod
    def _coerce(x):
        if isinstance(x, QScalar):
            return x
        if isinstance(x, (int, Fraction)):
            return QScalar.from_int(x)
        return NotImplemented

    def __bool__(self):
        return bool(self.num)

    def __eq__(self, other):
        other = QScalar._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __add__(self, other):
        other = QScalar._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return QScalar(
            _padd(_pmul(self.num, other.den), _pmul(other.num, self.den)),
            _pmul(self.den, other.den),
        )

    __radd__ = __add__

    def __neg__(self):
        return QScalar(_pneg(self.num), self.den)

    def __sub__(self, other):
        other = QScalar._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = QScalar._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return QScalar(_pmul(self.num, other.num), _pmul(self.den, other.den))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = QScalar._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if not other.num:
            raise ZeroDivisionError(f"division by zero QScalar ({other!r})")
        return QScalar(_pmul(self.num, other.den), _pmul(self.den, other.num))

    def __rtruediv__(self, other):
        other = QScalar._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __pow__(self, k: int):
        if k < 0:
            return (QQ_ONE / self) ** (-k)
        out = QQ_ONE
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def inverse(self) -> "QScalar":
        return QQ_ONE / self

    def is_one(self) -> bool:
        return self.num == (1,) and self.den == (1,)

    def is_monomial(self) -> bool:
        """True when the value is c·q^k with c rational (single term over single term)."""
        return (
            sum(1 for c in self.num if c) <= 1 and sum(1 for c in self.den if c) == 1
        )

    def monomial_exponent(self) -> int:
        """The k with self = q^k; raises for anything that is not a plain q-power."""
        if not (self.is_monomial() and self.num[-1:] == (1,) and self.den[-1] == 1):
            raise ValueError(f"{self!r} is not a power of q")
        return len(self.num) - len(self.den)

    def evaluate(self, value: Fraction) -> Fraction:
        """Specialize q to a rational number (test oracle only; q stays formal in the engine)."""
        num = sum(Fraction(c) * value**e for e, c in enumerate(self.num))
        den = sum(Fraction(c) * value**e for e, c in enumerate(self.den))
        return num / den

    def __repr__(self):
        if self.den == (1,):
            return _pstr(self.num)
        ns = _pstr(self.num)
        if sum(1 for c in self.num if c) > 1:
            ns = f"({ns})"
        ds = _pstr(self.den)
        if sum(1 for c in self.den if c) > 1:
            ds = f"({ds})"
        return f"{ns}/{ds}"


QQ_ZERO = QScalar(())
QQ_ONE = QScalar((1,))


def q_power(k: int) -> QScalar:
    """q^k for any integer k."""
    if k >= 0:
        return QScalar((0,) * k + (1,))
    return QScalar((1,), (0,) * (-k) + (1,))


def q_int(m: int, d: int = 1) -> QScalar:
    """Balanced q-integer [m]_{q^d} = (q^{dm} − q^{−dm})/(q^d − q^{−d})."""
    return (q_power(d * m) - q_power(-d * m)) / (q_power(d) - q_power(-d))


def q_binom(m: int, k: int, d: int = 1) -> QScalar:
    """Balanced q-binomial coefficient built from q_int factorials."""
    if k < 0 or k > m:
        return QQ_ZERO
    out = QQ_ONE
    for j in range(1, k + 1):
        out = out * q_int(m - k + j, d) / q_int(j, d)
    return out
