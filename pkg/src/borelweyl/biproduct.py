"""Straightening engine for the merged algebra of the two Borel halves.

Words over the letters E_i, H_i (or K_i^{±1}), F_i are reduced by oriented
rules until every E sits left of every Cartan letter and every Cartan letter
left of every F.  The rule set encodes the cross relations that merge the
halves into one algebra, so the irreducible words are exactly the ordered
monomials of a PBW basis.  Confluence of the rules is not assumed: it is
checked on all overlap ambiguities up to a degree bound, which is the finite,
machine-checkable shadow of the PBW claim.

Scalars are plain rationals in classical mode and exact rational functions
of q in quantum mode; nothing here ever touches floating point.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import comb

from .cartan import CartanMatrix, symmetrize, validate_gcm
from .exact import QQ_ONE, QScalar, q_binom, q_power

__all__ = [
    "NCPoly",
    "Rule",
    "RewriteSystem",
    "RewriteLimitError",
    "Ambiguity",
    "ConfluenceReport",
    "MixedRelationReport",
    "build_rules",
    "normal_form",
    "check_local_confluence",
    "mixed_relation_check",
    "parse_word",
    "word_str",
]


# -- scalars ------------------------------------------------------------------


def _as_matrix(C) -> CartanMatrix:
    return C if isinstance(C, CartanMatrix) else validate_gcm(C)


def _one(field):
    return Fraction(1) if field == "rational" else QQ_ONE


def _as_scalar(field, c):
    if field == "rational":
        if isinstance(c, (int, Fraction)):
            return Fraction(c)
    else:
        if isinstance(c, QScalar):
            return c
        if isinstance(c, (int, Fraction)):
            return QScalar.from_int(c)
    raise TypeError(f"{c!r} is not a scalar of the {field} field")


# -- words and polynomials ----------------------------------------------------


def word_str(word) -> str:
    return "*".join(word) if word else "1"


class NCPoly:
    """Finite scalar combination of words in the generator letters.

    Words multiply by concatenation; nothing is reordered here.  The terms
    map never stores zero coefficients.
    """

    __slots__ = ("field", "terms")

    def __init__(self, field: str, terms=None):
        if field not in ("rational", "q"):
            raise ValueError(f"unknown scalar field {field!r}")
        clean = {}
        for w, c in (terms or {}).items():
            c = _as_scalar(field, c)
            if c:
                clean[tuple(w)] = c
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, *a):
        raise AttributeError("NCPoly is immutable")

    @staticmethod
    def zero(field: str) -> "NCPoly":
        return NCPoly(field)

    @staticmethod
    def word(field: str, letters, coeff=1) -> "NCPoly":
        return NCPoly(field, {tuple(letters): coeff})

    @staticmethod
    def one(field: str) -> "NCPoly":
        return NCPoly.word(field, ())

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, NCPoly):
            return NotImplemented
        return self.field == other.field and self.terms == other.terms

    def __add__(self, other):
        if not isinstance(other, NCPoly):
            return NotImplemented
        out = dict(self.terms)
        for w, c in other.terms.items():
            prev = out.get(w)
            s = c if prev is None else prev + c
            if s:
                out[w] = s
            else:
                out.pop(w, None)
        return NCPoly(self.field, out)

    def __neg__(self):
        return NCPoly(self.field, {w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, NCPoly):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, NCPoly):
            return self.scale(other)
        out = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                w = w1 + w2
                prev = out.get(w)
                s = c1 * c2 if prev is None else prev + c1 * c2
                if s:
                    out[w] = s
                else:
                    out.pop(w, None)
        return NCPoly(self.field, out)

    def __rmul__(self, other):
        # scalars commute with everything, so one-sided scaling suffices
        return self.scale(other)

    def scale(self, c) -> "NCPoly":
        c = _as_scalar(self.field, c)
        if not c:
            return NCPoly.zero(self.field)
        return NCPoly(self.field, {w: c * v for w, v in self.terms.items()})

    def degree(self):
        """Length of the longest word, or None for the zero polynomial."""
        return max((len(w) for w in self.terms), default=None)

    def to_str(self) -> str:
        if not self.terms:
            return "0"
        words = sorted(self.terms, key=lambda w: (len(w), w), reverse=True)
        parts = []
        for w in words:
            cs = str(self.terms[w])
            neg = cs.startswith("-")
            if neg:
                cs = cs[1:]
            if "+" in cs or " - " in cs or "/" in cs:
                cs = f"({cs})"
            if not w:
                body = cs
            elif cs == "1":
                body = word_str(w)
            else:
                body = f"{cs}*{word_str(w)}"
            parts.append("-" + body if neg else body)
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out

    def __repr__(self):
        return self.to_str()


# -- rules and systems --------------------------------------------------------


@dataclass(frozen=True)
class Rule:
    """One oriented reduction: the lead word rewrites to the replacement.

    The lead always carries an implicit coefficient 1, so systems built from
    relations must normalize the relation's leading coefficient away first.
    """

    lead: tuple
    rhs: NCPoly
    tag: str

    def __str__(self):
        return f"{word_str(self.lead)} -> {self.rhs.to_str()}"


class RewriteLimitError(RuntimeError):
    """A reduction ran past the step limit; carries the trailing trace."""

    def __init__(self, steps: int, trace):
        self.steps = steps
        self.trace = tuple(trace)
        tail = "\n  ".join(self.trace)
        super().__init__(f"no normal form after {steps} steps; last reductions:\n  {tail}")


class RewriteSystem:
    """An oriented rule set over a fixed alphabet, with its term order.

    The order is graded (longer words are larger) with letter precedence
    F > H/K > E and index tiebreak inside a family; every rule must strictly
    decrease it, which makes any reduction sequence terminate.
    """

    def __init__(self, mode: str, matrix, d, rules):
        if mode not in ("classical", "quantum"):
            raise ValueError(f"unknown mode {mode!r}")
        self.mode = mode
        self.matrix = _as_matrix(matrix)
        self.d = d
        self.field = "rational" if mode == "classical" else "q"
        n = self.matrix.n
        self.n = n
        ranks = {}
        cartan = []
        for i in range(n):
            ranks[f"E{i + 1}"] = (0, i, 0)
            if mode == "classical":
                ranks[f"H{i + 1}"] = (1, i, 0)
                cartan.append(f"H{i + 1}")
            else:
                ranks[f"K{i + 1}"] = (1, i, 0)
                ranks[f"K{i + 1}^-1"] = (1, i, 1)
                cartan += [f"K{i + 1}", f"K{i + 1}^-1"]
            ranks[f"F{i + 1}"] = (2, i, 0)
        self._ranks = ranks
        self.alphabet = tuple(
            [f"E{i + 1}" for i in range(n)] + cartan + [f"F{i + 1}" for i in range(n)]
        )
        self.order = "graded, F > " + ("H" if mode == "classical" else "K") + " > E, index tiebreak"
        self.rules = tuple(rules)
        by_first = {}
        for rule in self.rules:
            if not rule.lead:
                raise ValueError("empty lead word")
            for letter in rule.lead:
                if letter not in ranks:
                    raise ValueError(f"rule lead uses unknown letter {letter!r}")
            lead_key = self.order_key(rule.lead)
            for w in rule.rhs.terms:
                if self.order_key(w) >= lead_key:
                    raise ValueError(f"rule {rule} does not decrease the term order")
            by_first.setdefault(rule.lead[0], []).append(rule)
        self._by_first = by_first

    def order_key(self, word):
        return (len(word), tuple(self._ranks[letter] for letter in word))

    def redexes(self, word):
        """Every (position, rule) whose lead occurs at that position."""
        out = []
        for pos, letter in enumerate(word):
            for rule in self._by_first.get(letter, ()):
                lead = rule.lead
                if word[pos : pos + len(lead)] == lead:
                    out.append((pos, rule))
        return out

    def is_normal(self, word) -> bool:
        return not self.redexes(word)

    def zero(self) -> NCPoly:
        return NCPoly.zero(self.field)

    def poly(self, letters, coeff=1) -> NCPoly:
        return NCPoly.word(self.field, letters, coeff)


# -- rule construction --------------------------------------------------------


def _serre_rules(letter: str, i: int, j: int, m: int, coeffs, field) -> Rule:
    """The order-maximal word of the window rewrites to the rest.

    coeffs[k] is the signed coefficient on letter_i^{m-k} letter_j letter_i^k;
    both end coefficients are ±1, so normalizing stays division-free in q.
    """
    li, lj = f"{letter}{i + 1}", f"{letter}{j + 1}"
    words = [(li,) * (m - k) + (lj,) + (li,) * k for k in range(m + 1)]
    if i > j:
        lead, lead_c = words[0], coeffs[0]
    else:
        lead, lead_c = words[m], coeffs[m]
    rhs = {w: -(c / lead_c) for w, c in zip(words, coeffs) if w != lead}
    return Rule(lead, NCPoly(field, rhs), "serre")


def build_rules(C, d=None, mode: str = "classical") -> RewriteSystem:
    """Assemble the straightening rules for a Cartan matrix.

    Classical rules move every F right past H and E, every H right past E,
    sort commuting letters by index, and reduce the maximal word of each
    Serre window.  Quantum rules do the same with K-letter scalings and
    balanced q-binomial Serre coefficients; K and K^-1 cancel on contact.
    """
    C = _as_matrix(C)
    n = C.n
    rules = []
    if mode == "classical":
        field = "rational"
        one = Fraction(1)
        for j in range(n):
            for i in range(n):
                rhs = {(f"E{i + 1}", f"F{j + 1}"): one}
                if i == j:
                    rhs[(f"H{i + 1}",)] = -one
                rules.append(Rule((f"F{j + 1}", f"E{i + 1}"), NCPoly(field, rhs), "pairing"))
        for i in range(n):
            for j in range(n):
                a = Fraction(C[i, j])
                rhs = {(f"E{j + 1}", f"H{i + 1}"): one}
                if a:
                    rhs[(f"E{j + 1}",)] = a
                rules.append(Rule((f"H{i + 1}", f"E{j + 1}"), NCPoly(field, rhs), "weight"))
                rhs = {(f"H{i + 1}", f"F{j + 1}"): one}
                if a:
                    rhs[(f"F{j + 1}",)] = a
                rules.append(Rule((f"F{j + 1}", f"H{i + 1}"), NCPoly(field, rhs), "weight"))
        for i in range(n):
            for j in range(i):
                rules.append(
                    Rule(
                        (f"H{i + 1}", f"H{j + 1}"),
                        NCPoly.word(field, (f"H{j + 1}", f"H{i + 1}")),
                        "sort",
                    )
                )
        _letter_sorts(rules, C, n, field, ("E", "F"))
        for i in range(n):
            for j in range(n):
                if i != j and C[i, j] < 0:
                    m = 1 - C[i, j]
                    coeffs = [Fraction((-1) ** k * comb(m, k)) for k in range(m + 1)]
                    for letter in ("E", "F"):
                        rules.append(_serre_rules(letter, i, j, m, coeffs, field))
        return RewriteSystem(mode, C, None, rules)

    if mode != "quantum":
        raise ValueError(f"unknown mode {mode!r}")
    field = "q"
    d = tuple(d) if d is not None else symmetrize(C)
    for i in range(n):
        ki, kinv = f"K{i + 1}", f"K{i + 1}^-1"
        rules.append(Rule((ki, kinv), NCPoly.one(field), "unit"))
        rules.append(Rule((kinv, ki), NCPoly.one(field), "unit"))
    for j in range(n):
        for i in range(n):
            rhs = {(f"E{i + 1}", f"F{j + 1}"): QQ_ONE}
            if i == j:
                c = (q_power(d[i]) - q_power(-d[i])).inverse()
                rhs[(f"K{i + 1}",)] = -c
                rhs[(f"K{i + 1}^-1",)] = c
            rules.append(Rule((f"F{j + 1}", f"E{i + 1}"), NCPoly(field, rhs), "pairing"))
    for i in range(n):
        for j in range(n):
            e = d[i] * C[i, j]
            for ki, s in ((f"K{i + 1}", 1), (f"K{i + 1}^-1", -1)):
                rules.append(
                    Rule(
                        (ki, f"E{j + 1}"),
                        NCPoly(field, {(f"E{j + 1}", ki): q_power(s * e)}),
                        "weight",
                    )
                )
                rules.append(
                    Rule(
                        (f"F{j + 1}", ki),
                        NCPoly(field, {(ki, f"F{j + 1}"): q_power(s * e)}),
                        "weight",
                    )
                )
    for i in range(n):
        for j in range(i):
            for hi in (f"K{i + 1}", f"K{i + 1}^-1"):
                for lo in (f"K{j + 1}", f"K{j + 1}^-1"):
                    rules.append(Rule((hi, lo), NCPoly.word(field, (lo, hi)), "sort"))
    _letter_sorts(rules, C, n, field, ("E", "F"))
    for i in range(n):
        for j in range(n):
            if i != j and C[i, j] < 0:
                m = 1 - C[i, j]
                coeffs = [(-1) ** k * q_binom(m, k, d[i]) for k in range(m + 1)]
                for letter in ("E", "F"):
                    rules.append(_serre_rules(letter, i, j, m, coeffs, field))
    return RewriteSystem(mode, C, d, rules)


def _letter_sorts(rules, C, n, field, letters):
    # disconnected pairs commute outright; connected pairs are handled by Serre
    for i in range(n):
        for j in range(i):
            if C[i, j] == 0:
                for letter in letters:
                    rules.append(
                        Rule(
                            (f"{letter}{i + 1}", f"{letter}{j + 1}"),
                            NCPoly.word(field, (f"{letter}{j + 1}", f"{letter}{i + 1}")),
                            "sort",
                        )
                    )


# -- reduction ----------------------------------------------------------------


def _apply_at(word, pos, rule, field) -> NCPoly:
    head, tail = word[:pos], word[pos + len(rule.lead) :]
    return NCPoly(field, {head + w + tail: c for w, c in rule.rhs.terms.items()})


_STRATEGIES = {
    "leftmost": lambda redexes: redexes[0],
    "rightmost": lambda redexes: redexes[-1],
}


def normal_form(p: NCPoly, R: RewriteSystem, strategy="leftmost", step_limit: int = 200_000) -> NCPoly:
    """Reduce until no rule applies to any word.

    Always reduces the largest remaining word; within it the strategy picks
    the redex ("leftmost" by default, ties broken by rule construction
    order, or any callable on the redex list).  Every rule decreases the
    term order, so this terminates; the step limit is a tripwire whose
    error carries the tail of the reduction trace.
    """
    pick = strategy if callable(strategy) else _STRATEGIES.get(strategy)
    if pick is None:
        raise ValueError(f"unknown strategy {strategy!r}")
    if p.field != R.field:
        raise ValueError(f"{p.field} polynomial given to a {R.field} system")
    work = dict(p.terms)
    done = {}
    steps = 0
    trace = []
    while work:
        word = max(work, key=R.order_key)
        coeff = work.pop(word)
        redexes = R.redexes(word)
        if not redexes:
            prev = done.get(word)
            s = coeff if prev is None else prev + coeff
            if s:
                done[word] = s
            else:
                done.pop(word, None)
            continue
        steps += 1
        pos, rule = pick(redexes)
        trace.append(f"{word_str(word)} at {pos} via {word_str(rule.lead)}")
        if len(trace) > 12:
            trace.pop(0)
        if steps > step_limit:
            raise RewriteLimitError(steps, trace)
        head, tail = word[:pos], word[pos + len(rule.lead) :]
        for w, c in rule.rhs.terms.items():
            nw = head + w + tail
            prev = work.get(nw)
            s = coeff * c if prev is None else prev + coeff * c
            if s:
                work[nw] = s
            else:
                work.pop(nw, None)
    return NCPoly(R.field, done)


# -- local confluence ---------------------------------------------------------


@dataclass(frozen=True)
class Ambiguity:
    """One overlap word with its two one-step reducts chased to normal form."""

    word: tuple
    left: str
    right: str
    nf_left: str
    nf_right: str
    resolved: bool

    def __str__(self):
        mark = "ok  " if self.resolved else "FAIL"
        return f"[{mark}] {word_str(self.word)}  ({self.left} vs {self.right})"


@dataclass(frozen=True)
class ConfluenceReport:
    mode: str
    degree_bound: int
    ambiguities: tuple

    @property
    def passed(self) -> bool:
        return all(a.resolved for a in self.ambiguities)

    def unresolved(self):
        return tuple(a for a in self.ambiguities if not a.resolved)

    def summary_lines(self):
        bad = self.unresolved()
        lines = [
            f"{self.mode} rewriting, overlaps of degree <= {self.degree_bound}: "
            f"{len(self.ambiguities)} ambiguities, {len(self.ambiguities) - len(bad)} resolved"
        ]
        for a in bad:
            lines.append(f"  {a}")
            lines.append(f"    one way:   {a.nf_left}")
            lines.append(f"    other way: {a.nf_right}")
        return lines


def check_local_confluence(R: RewriteSystem, degree_bound: int) -> ConfluenceReport:
    """Resolve every rule overlap of total degree up to the bound.

    Covers proper overlaps (a suffix of one lead is a prefix of the other)
    and containments (one lead inside the other); each ambiguity is reduced
    both ways and chased to normal form.  Unresolved ambiguities land in the
    report rather than raising: they are the finding.
    """
    if degree_bound < 2:
        raise ValueError("degree bound below any two rule leads")
    found = []

    def chase(word, pos1, r1, pos2, r2):
        nf1 = normal_form(_apply_at(word, pos1, r1, R.field), R)
        nf2 = normal_form(_apply_at(word, pos2, r2, R.field), R)
        found.append(
            Ambiguity(
                word,
                f"{word_str(r1.lead)} at {pos1}",
                f"{word_str(r2.lead)} at {pos2}",
                nf1.to_str(),
                nf2.to_str(),
                nf1 == nf2,
            )
        )

    for r1 in R.rules:
        l1 = r1.lead
        for r2 in R.rules:
            l2 = r2.lead
            for k in range(1, min(len(l1), len(l2))):
                if l1[len(l1) - k :] == l2[:k]:
                    word = l1 + l2[k:]
                    if len(word) <= degree_bound:
                        chase(word, 0, r1, len(l1) - k, r2)
            if len(l2) < len(l1) <= degree_bound:
                for pos in range(len(l1) - len(l2) + 1):
                    if l1[pos : pos + len(l2)] == l2:
                        chase(l1, 0, r1, pos, r2)
    return ConfluenceReport(R.mode, degree_bound, tuple(found))


# -- the cross relations, checked through the engine ---------------------------


@dataclass(frozen=True)
class MixedRelationReport:
    mode: str
    entries: tuple  # (name, normal-form string, passed)

    @property
    def passed(self) -> bool:
        return all(ok for _, _, ok in self.entries)

    def summary_lines(self):
        return [
            f"[{'pass' if ok else 'FAIL'}] {name}  ->  {nf}" for name, nf, ok in self.entries
        ]


def mixed_relation_check(R: RewriteSystem, C=None) -> MixedRelationReport:
    """Normalize [E_i, F_j] minus its expected value for every pair.

    The expected value is delta_ij H_i classically and the balanced
    (K_i - K_i^-1) quotient in quantum mode; a healthy system sends each
    difference to zero in one pairing step plus straightening.
    """
    C = R.matrix if C is None else _as_matrix(C)
    n = C.n
    entries = []
    for i in range(n):
        for j in range(n):
            ei, fj = f"E{i + 1}", f"F{j + 1}"
            p = R.poly((ei, fj)) - R.poly((fj, ei))
            if i == j:
                if R.mode == "classical":
                    p = p - R.poly((f"H{i + 1}",))
                else:
                    c = (q_power(R.d[i]) - q_power(-R.d[i])).inverse()
                    p = p - R.poly((f"K{i + 1}",), c) + R.poly((f"K{i + 1}^-1",), c)
            nf = normal_form(p, R)
            entries.append((f"[{ei},{fj}] cross relation", nf.to_str(), not nf))
    return MixedRelationReport(R.mode, tuple(entries))


# -- parsing (for the command line) --------------------------------------------


_LETTER = re.compile(r"^[EFHK]\d+(\^-1)?$")


def parse_word(text: str, R: RewriteSystem):
    """Split 'F1*E1' or 'F1 E1' into a word over the system's alphabet."""
    tokens = [t for t in re.split(r"[\s*]+", text.strip()) if t]
    word = []
    for tok in tokens:
        if not _LETTER.match(tok) or tok not in R._ranks:
            raise ValueError(
                f"unknown generator {tok!r}; expected one of {', '.join(R.alphabet)}"
            )
        word.append(tok)
    return tuple(word)
