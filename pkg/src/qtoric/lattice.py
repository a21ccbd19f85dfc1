"""Integer linear algebra: normal forms, the facet projection and its kernel."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import _rational
from .errors import AmbientTooLarge, NonIntegerNormal, RankDeficient

DEFAULT_ENUMERATION_BOUND = 16


@dataclass(frozen=True)
class IntMatrix:
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in row) for row in self.entries)
        if rows and len({len(r) for r in rows}) != 1:
            raise ValueError("ragged matrix")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        cols = list(zip(*other.entries))
        return IntMatrix(tuple(tuple(sum(a * b for a, b in zip(row, col)) for col in cols)
                               for row in self.entries))

    def transpose(self) -> "IntMatrix":
        return IntMatrix(tuple(zip(*self.entries)))

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(row[j] for row in self.entries)

    def apply(self, v: Sequence[int]) -> tuple[int, ...]:
        return tuple(sum(a * b for a, b in zip(row, v)) for row in self.entries)

    def det(self) -> int:
        return int(_rational.det(self.entries))

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.entries]


@dataclass(frozen=True)
class SmithDecomposition:
    U: IntMatrix
    D: IntMatrix
    V: IntMatrix

    @property
    def divisors(self) -> tuple[int, ...]:
        return tuple(self.D[i, i] for i in range(min(self.D.rows, self.D.cols)))

    @property
    def rank(self) -> int:
        return sum(1 for d in self.divisors if d != 0)


def smith_normal_form(M: IntMatrix) -> SmithDecomposition:
    """Return U, D, V with U @ M @ V == D, U and V unimodular, d_1 | d_2 | ..."""
    m, n = M.rows, M.cols
    A = [list(r) for r in M.entries]
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for mat in (A, V):
            for row in mat:
                row[i], row[j] = row[j], row[i]

    def add_row(dst, src, q):  # row dst += q * row src
        A[dst] = [a + q * b for a, b in zip(A[dst], A[src])]
        U[dst] = [a + q * b for a, b in zip(U[dst], U[src])]

    def add_col(dst, src, q):
        for mat in (A, V):
            for row in mat:
                row[dst] += q * row[src]

    for t in range(min(m, n)):
        while True:
            nz = [(abs(A[i][j]), i, j) for i in range(t, m) for j in range(t, n) if A[i][j]]
            if not nz:
                break
            _, i, j = min(nz)
            swap_rows(t, i)
            swap_cols(t, j)
            p = A[t][t]
            clean = True
            for i in range(t + 1, m):
                if A[i][t]:
                    add_row(i, t, -(A[i][t] // p))
                    clean = clean and A[i][t] == 0
            for j in range(t + 1, n):
                if A[t][j]:
                    add_col(j, t, -(A[t][j] // p))
                    clean = clean and A[t][j] == 0
            if not clean:
                continue
            bad = next((i for i in range(t + 1, m) for j in range(t + 1, n) if A[i][j] % p), None)
            if bad is None:
                break
            add_row(t, bad, 1)
        if t < m and t < n and A[t][t] < 0:
            A[t] = [-a for a in A[t]]
            U[t] = [-a for a in U[t]]
    return SmithDecomposition(IntMatrix(U), IntMatrix(A), IntMatrix(V))


def hermite_normal_form(rows: Sequence[Sequence[int]]) -> tuple[tuple[int, ...], ...]:
    """Row-style HNF of the lattice spanned by ``rows``: a canonical basis.

    Two integer row sets span the same lattice iff their HNFs agree.
    """
    A = [list(map(int, r)) for r in rows if any(r)]
    if not A:
        return ()
    ncols = len(A[0])
    r = 0
    for c in range(ncols):
        if r == len(A):
            break
        # gcd-reduce column c below row r
        while True:
            nz = [i for i in range(r, len(A)) if A[i][c]]
            if not nz:
                break
            p = min(nz, key=lambda i: abs(A[i][c]))
            A[r], A[p] = A[p], A[r]
            done = True
            for i in range(r + 1, len(A)):
                if A[i][c]:
                    q = A[i][c] // A[r][c]
                    A[i] = [a - q * b for a, b in zip(A[i], A[r])]
                    done = done and A[i][c] == 0
            if done:
                break
        if r < len(A) and A[r][c]:
            if A[r][c] < 0:
                A[r] = [-a for a in A[r]]
            for i in range(r):
                q = A[i][c] // A[r][c]
                A[i] = [a - q * b for a, b in zip(A[i], A[r])]
            r += 1
    return tuple(tuple(row) for row in A[:r])


def same_lattice(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]]) -> bool:
    return hermite_normal_form(a) == hermite_normal_form(b)


@dataclass(frozen=True)
class KernelLattice:
    """Integer basis of ker(pi) intersected with Z^d, one basis vector per entry."""

    ambient_dim: int
    basis: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "basis", tuple(tuple(int(x) for x in b) for b in self.basis))
        if any(len(b) != self.ambient_dim for b in self.basis):
            raise ValueError("basis vectors must have the ambient length")

    @classmethod
    def from_basis(cls, basis: Sequence[Sequence[int]]) -> "KernelLattice":
        basis = [tuple(b) for b in basis]
        return cls(len(basis[0]), tuple(basis))

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def matrix(self) -> IntMatrix:
        """The d x k matrix whose columns are the basis vectors."""
        return IntMatrix(tuple(zip(*self.basis))) if self.basis else IntMatrix(())

    def contains(self, v: Sequence[int]) -> bool:
        """Membership in the integer span of the basis."""
        return same_lattice(list(self.basis) + [tuple(v)], self.basis)


def projection_from_normals(P) -> IntMatrix:
    """The m x d matrix sending e_i to the i-th facet normal."""
    cols = []
    for f in P.facets:
        if any(Fraction(v).denominator != 1 for v in f.normal):
            raise NonIntegerNormal(f"normal {f.normal} is not integral")
        cols.append(tuple(int(v) for v in f.normal))
    return IntMatrix(tuple(zip(*cols)))


def kernel_lattice(pi: IntMatrix) -> KernelLattice:
    snf = smith_normal_form(pi)
    if snf.rank != pi.rows:
        raise RankDeficient(f"projection has rank {snf.rank} < {pi.rows}")
    basis = tuple(snf.V.column(j) for j in range(snf.rank, pi.cols))
    K = KernelLattice(pi.cols, basis)
    # certificate: every vector is killed by pi and the basis is saturated
    assert all(not any(pi.apply(b)) for b in basis)
    if basis:
        assert all(x == 1 for x in smith_normal_form(K.matrix).divisors)
    return K


def surjective_onto_lattice(pi: IntMatrix) -> bool:
    divs = smith_normal_form(pi).divisors
    return len(divs) == pi.rows and all(d == 1 for d in divs)


def canonical_sign(v: Sequence[int]) -> tuple[int, ...]:
    """Representative of {v, -v} whose first nonzero entry is positive."""
    v = tuple(v)
    first = next((x for x in v if x), 0)
    return tuple(-x for x in v) if first < 0 else v


def _pivot_rows(basis_cols: list[tuple[int, ...]], d: int) -> list[int]:
    # rows of the d x k basis matrix forming an invertible k x k block
    _, piv = _rational.row_reduce([list(b) for b in basis_cols])
    return piv


def enumerate_short_kernel_vectors(K: KernelLattice,
                                   bound: int = DEFAULT_ENUMERATION_BOUND) -> list[tuple[int, ...]]:
    """All lattice vectors with entries in {-1, 0, 1}, one per sign class, sorted.

    A lattice vector is determined by its entries on k independent rows, so it
    suffices to try the 3^k patterns there and keep the integral completions.
    """
    d, k = K.ambient_dim, K.rank
    if d > bound:
        raise AmbientTooLarge(f"ambient dimension {d} exceeds enumeration bound {bound}")
    if k == 0:
        return []
    rows = _pivot_rows(list(K.basis), d)
    block = [[K.basis[j][r] for j in range(k)] for r in rows]
    inv = _rational.inverse(block)
    found = set()
    for pattern in itertools.product((-1, 0, 1), repeat=k):
        if not any(pattern):
            continue
        coeffs = [sum(inv[i][j] * pattern[j] for j in range(k)) for i in range(k)]
        if any(c.denominator != 1 for c in coeffs):
            continue
        v = tuple(sum(int(coeffs[j]) * K.basis[j][i] for j in range(k)) for i in range(d))
        if all(x in (-1, 0, 1) for x in v):
            found.add(canonical_sign(v))
    return sorted(found)
