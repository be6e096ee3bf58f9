"""Generalized Cartan matrices and the exact linear algebra they induce.

Everything downstream hangs off the data computed here: a minimal integer
symmetrizer d, exact rank and corank, a quasi-inverse Q, a left kernel,
dual pairs (q_i, m_i) with q_iᵀ·C·m_j = δ_ij, an integer complement making
{m_i} part of a ℤⁿ basis, and the lattice scalings g read off Q's columns.

For invertible C this degenerates to Q = C⁻¹ with m_i the standard basis.
In positive corank the coordinate-aligned identity Σ_u c_ju a_ui = δ_ij is
unattainable (it would put standard basis vectors in the row space of C),
so the dual pairs generalize it: m_i come from a unimodular column reduction
of C, which simultaneously yields a saturated integer kernel basis whose
vectors complete {m_i} to ℤⁿ.  All elimination is fraction-free with a
first-maximal-absolute-value pivot rule, so results are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm

__all__ = [
    "CartanError",
    "CartanMatrix",
    "CartanAux",
    "validate_gcm",
    "symmetrize",
    "rank_corank",
    "quasi_inverse",
    "lattice_scaling",
    "CATALOG",
    "catalog_matrix",
]


class CartanError(ValueError):
    """A matrix failed a Cartan axiom; carries the axiom name and position."""

    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position


@dataclass(frozen=True)
class CartanMatrix:
    n: int
    entries: tuple  # n rows of n ints

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def row(self, i):
        return self.entries[i]

    def column(self, j):
        return tuple(r[j] for r in self.entries)

    def transpose(self) -> "CartanMatrix":
        return CartanMatrix(self.n, tuple(zip(*self.entries)))


@dataclass(frozen=True)
class CartanAux:
    matrix: CartanMatrix
    d: tuple  # minimal positive integer symmetrizer
    rank: int
    corank: int
    Q: tuple  # n×n Fractions: dual-pair rows stacked over leftKernel rows
    left_kernel: tuple  # corank rows of ints, each annihilating C on the left
    dual_pairs: tuple  # rank pairs (q_i: Fractions, m_i: ints)
    torus_complement: tuple  # corank integer vectors completing {m_i} to a ℤⁿ basis
    g: tuple  # positive ints: lcm of denominators per Q column


def validate_gcm(rows) -> CartanMatrix:
    rows = [tuple(int(x) for x in r) for r in rows]
    n = len(rows)
    if n == 0 or any(len(r) != n for r in rows):
        raise CartanError("matrix is not square")
    for i in range(n):
        if rows[i][i] != 2:
            raise CartanError(
                f"diagonal entry != 2 at ({i + 1},{i + 1}): {rows[i][i]}", (i, i)
            )
        for j in range(n):
            if i == j:
                continue
            if rows[i][j] > 0:
                raise CartanError(
                    f"positive off-diagonal entry at ({i + 1},{j + 1}): {rows[i][j]}", (i, j)
                )
            if rows[i][j] == 0 and rows[j][i] != 0:
                # report on the zero side of the broken pair
                raise CartanError(
                    f"zero-symmetry violated at ({i + 1},{j + 1}): "
                    f"a[{i + 1}][{j + 1}]=0 but a[{j + 1}][{i + 1}]={rows[j][i]}",
                    (i, j),
                )
    return CartanMatrix(n, tuple(rows))


def symmetrize(C: CartanMatrix) -> tuple:
    """Minimal positive integers d with d_i·a_ij = d_j·a_ji, per component."""
    n = C.n
    weight = [None] * n
    for root in range(n):
        if weight[root] is not None:
            continue
        weight[root] = Fraction(1)
        stack = [root]
        component = [root]
        while stack:
            i = stack.pop()
            for j in range(n):
                if i == j or C[i, j] == 0:
                    continue
                implied = weight[i] * Fraction(C[i, j], C[j, i])
                if weight[j] is None:
                    weight[j] = implied
                    component.append(j)
                    stack.append(j)
                elif weight[j] != implied:
                    raise CartanError(
                        f"not symmetrizable: inconsistent ratio cycle through ({i + 1},{j + 1})"
                    )
        scale = lcm(*(w.denominator for w in (weight[k] for k in component)))
        ints = [weight[k] * scale for k in component]
        shrink = gcd(*(int(v) for v in ints))
        for k, v in zip(component, ints):
            weight[k] = Fraction(int(v) // shrink)
    d = tuple(int(w) for w in weight)
    for i in range(n):
        for j in range(n):
            if d[i] * C[i, j] != d[j] * C[j, i]:
                raise CartanError("not symmetrizable")
    return d


def _bareiss_rank(rows) -> int:
    m = [list(r) for r in rows]
    nr, nc = len(m), len(m[0])
    rank = 0
    prev = 1
    col = 0
    while rank < nr and col < nc:
        piv = None
        best = 0
        for r in range(rank, nr):
            if abs(m[r][col]) > best:
                best = abs(m[r][col])
                piv = r
        if piv is None or best == 0:
            col += 1
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for r in range(rank + 1, nr):
            for c in range(col + 1, nc):
                m[r][c] = (m[rank][col] * m[r][c] - m[r][col] * m[rank][c]) // prev
            m[r][col] = 0
        prev = m[rank][col]
        rank += 1
        col += 1
    return rank


def rank_corank(C: CartanMatrix) -> tuple:
    r = _bareiss_rank(C.entries)
    return r, C.n - r


def _column_reduce(rows):
    """Unimodular V with (rows)·V = [independent columns | zero columns].

    Returns (V columns forming the non-kernel part, V columns spanning the
    saturated integer kernel, reduced non-kernel columns of rows·V).  The
    reduced columns are in echelon position: column k vanishes on every
    pivot row before its own.  Gcd-style column reduction; pivots positive.
    """
    nr = len(rows)
    nc = len(rows[0])
    W = [list(r) for r in rows]
    V = [[1 if i == j else 0 for j in range(nc)] for i in range(nc)]  # columns of identity

    def col_addmul(dst, src, k):
        for i in range(nr):
            W[i][dst] += k * W[i][src]
        for i in range(nc):
            V[i][dst] += k * V[i][src]

    def col_swap(a, b):
        for i in range(nr):
            W[i][a], W[i][b] = W[i][b], W[i][a]
        for i in range(nc):
            V[i][a], V[i][b] = V[i][b], V[i][a]

    def col_negate(a):
        for i in range(nr):
            W[i][a] = -W[i][a]
        for i in range(nc):
            V[i][a] = -V[i][a]

    rank = 0
    for row in range(nr):
        live = [j for j in range(rank, nc) if W[row][j] != 0]
        if not live:
            continue
        while len(live) > 1:
            live.sort(key=lambda j: (abs(W[row][j]), j))
            base = live[0]
            for j in live[1:]:
                col_addmul(j, base, -(W[row][j] // W[row][base]))
            live = [j for j in live if W[row][j] != 0]
        piv = live[0]
        if W[row][piv] < 0:
            col_negate(piv)
        col_swap(rank, piv)
        rank += 1
    image_part = [tuple(V[i][j] for i in range(nc)) for j in range(rank)]
    kernel_part = [tuple(V[i][j] for i in range(nc)) for j in range(rank, nc)]
    reduced = [tuple(W[i][j] for i in range(nr)) for j in range(rank)]
    return image_part, kernel_part, reduced


def _solve_pairing(C: CartanMatrix, ms):
    """Rational q_i with q_iᵀ·C·m_j = δ_ij, supported on pivot rows of C·M."""
    n, r = C.n, len(ms)
    B = [[sum(C[i, k] * m[k] for k in range(n)) for m in ms] for i in range(n)]  # n×r
    # choose r independent rows of B, first-maximal pivots for reproducibility
    work = [[Fraction(x) for x in row] + [idx] for idx, row in enumerate(B)]
    sel = []
    rank = 0
    for col in range(r):
        piv, best = None, Fraction(0)
        for t in range(rank, len(work)):
            if abs(work[t][col]) > best:
                best, piv = abs(work[t][col]), t
        assert piv is not None and best, "pairing system lost rank"
        work[rank], work[piv] = work[piv], work[rank]
        sel.append(work[rank][-1])
        inv = 1 / work[rank][col]
        work[rank][:r] = [x * inv for x in work[rank][:r]]
        for t in range(len(work)):
            if t != rank and work[t][col]:
                f = work[t][col]
                work[t][:r] = [a - f * b for a, b in zip(work[t][:r], work[rank][:r])]
        rank += 1
    sel.sort()
    R = [[Fraction(B[i][j]) for j in range(r)] for i in sel]  # r×r invertible
    Rinv = _fraction_inverse(R)
    qs = []
    for i in range(r):
        q = [Fraction(0)] * n
        for t, row_idx in enumerate(sel):
            q[row_idx] = Rinv[i][t]
        qs.append(tuple(q))
    return qs


def _fraction_inverse(M):
    k = len(M)
    aug = [[Fraction(M[i][j]) for j in range(k)] + [Fraction(1 if j == i else 0) for j in range(k)] for i in range(k)]
    for col in range(k):
        piv, best = None, Fraction(0)
        for r in range(col, k):
            if abs(aug[r][col]) > best:
                best, piv = abs(aug[r][col]), r
        assert piv is not None and best, "singular matrix"
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(k):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [row[k:] for row in aug]


def lattice_scaling(Q) -> tuple:
    """g_j = lcm of the denominators in column j of a rational matrix."""
    n = len(Q)
    return tuple(lcm(*(Q[i][j].denominator for i in range(n))) for j in range(n))


def quasi_inverse(C: CartanMatrix) -> CartanAux:
    d = symmetrize(C)
    r, corank = rank_corank(C)
    n = C.n
    if corank == 0:
        Qrows = _fraction_inverse([[Fraction(x) for x in row] for row in C.entries])
        Q = tuple(tuple(row) for row in Qrows)
        pairs = tuple(
            (Q[i], tuple(1 if k == i else 0 for k in range(n))) for i in range(r)
        )
        aux = CartanAux(C, d, r, 0, Q, (), pairs, (), lattice_scaling(Q))
    else:
        ms, complement, _ = _column_reduce(C.entries)
        _, left_kernel, _ = _column_reduce([list(col) for col in zip(*C.entries)])
        qs = _solve_pairing(C, ms)
        Q = tuple(list(qs) + [tuple(Fraction(x) for x in w) for w in left_kernel])
        aux = CartanAux(
            C,
            d,
            r,
            corank,
            Q,
            tuple(left_kernel),
            tuple(zip(qs, ms)),
            tuple(complement),
            lattice_scaling(Q),
        )
    _check_aux(aux)
    return aux


def _check_aux(aux: CartanAux):
    C, n = aux.matrix, aux.matrix.n
    for i, (q, _) in enumerate(aux.dual_pairs):
        for j, (_, m) in enumerate(aux.dual_pairs):
            pair = sum(q[u] * sum(C[u, v] * m[v] for v in range(n)) for u in range(n))
            assert pair == (1 if i == j else 0), "dual pairing identity failed"
    for w in aux.left_kernel:
        assert all(sum(w[i] * C[i, j] for i in range(n)) == 0 for j in range(n))
    basis = [list(m) for _, m in aux.dual_pairs] + [list(v) for v in aux.torus_complement]
    assert abs(_int_det(basis)) == 1, "m-vectors plus complement are not unimodular"
    if aux.corank == 0:
        ident = [[sum(aux.Q[i][k] * C[k, j] for k in range(n)) for j in range(n)] for i in range(n)]
        assert all(ident[i][j] == (1 if i == j else 0) for i in range(n) for j in range(n))


def _int_det(m):
    k = len(m)
    if k == 1:
        return m[0][0]
    total = 0
    for j in range(k):
        minor = [row[:j] + row[j + 1 :] for row in m[1:]]
        term = m[0][j] * _int_det(minor)
        total += term if j % 2 == 0 else -term
    return total


CATALOG = {
    "A1": ((2,),),
    "A2": ((2, -1), (-1, 2)),
    "A1xA1": ((2, 0), (0, 2)),
    "A3": ((2, -1, 0), (-1, 2, -1), (0, -1, 2)),
    "B2": ((2, -2), (-1, 2)),
    "G2": ((2, -1), (-3, 2)),
    "A1affine": ((2, -2), (-2, 2)),
}


def catalog_matrix(name: str) -> CartanMatrix:
    key = name.replace("~", "affine")
    if key not in CATALOG:
        raise KeyError(f"unknown catalog name {name!r}; choose from {sorted(CATALOG)}")
    return validate_gcm(CATALOG[key])
