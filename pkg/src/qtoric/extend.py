"""Extending the torus action of N to Sp(1)^(d-m), and the resulting action tables.

A basis matrix has one column per basis vector of the kernel lattice.  It is
*reduced* when all entries are in {-1, 0, 1} and each row has at most two
nonzeros.  The obstruction is a pair of rows supported on the same column pair
whose entry products have opposite signs; this is the orbit of
``[[1, -1], [1, 1]]`` under column negation and row/column permutation.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import _rational
from .errors import (AmbientTooLarge, DependentColumns, NotReduced, ParseError, PatternPresent,
                     Unsupported)
from .lattice import (DEFAULT_ENUMERATION_BOUND, IntMatrix, KernelLattice,
                      enumerate_short_kernel_vectors, smith_normal_form)

DEFAULT_RANK_BOUND = 6

NO_REDUCED_BASIS = "NoReducedBasis"
ALL_BASES_CONTAIN_PATTERN = "AllBasesContainPattern"


@dataclass(frozen=True)
class BasisMatrix:
    columns: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        cols = tuple(tuple(int(x) for x in c) for c in self.columns)
        if len({len(c) for c in cols}) > 1:
            raise ValueError("columns must share a length")
        object.__setattr__(self, "columns", cols)

    @property
    def d(self) -> int:
        return len(self.columns[0]) if self.columns else 0

    @property
    def k(self) -> int:
        return len(self.columns)

    @property
    def rows(self) -> list[tuple[int, ...]]:
        return list(zip(*self.columns))

    def __str__(self) -> str:
        return "\n".join(" ".join(f"{x:2d}" for x in row) for row in self.rows)


def _reduced_rows(rows: Iterable[Sequence[int]]) -> bool:
    return all(all(x in (-1, 0, 1) for x in r) and sum(1 for x in r if x) <= 2 for r in rows)


def is_reduced_basis(B: BasisMatrix) -> bool:
    if _rational.rank([list(c) for c in B.columns]) < B.k:
        raise DependentColumns("basis columns are linearly dependent")
    return _reduced_rows(B.rows)


def _find_pattern(rows: Sequence[Sequence[int]]) -> tuple[int, int, int, int] | None:
    first_with_sign: dict[tuple[int, int, int], int] = {}
    for i, row in enumerate(rows):
        nz = [j for j, x in enumerate(row) if x]
        if len(nz) != 2:
            continue
        s, t = nz
        sign = 1 if row[s] * row[t] > 0 else -1
        prev = first_with_sign.get((s, t, -sign))
        if prev is not None:
            return (prev, i, s, t)
        first_with_sign.setdefault((s, t, sign), i)
    return None


def contains_forbidden_pattern(A: BasisMatrix) -> tuple[int, int, int, int] | None:
    """Return ``(row1, row2, col1, col2)`` of an obstruction, or None."""
    if not _reduced_rows(A.rows):
        raise NotReduced("matrix is not reduced")
    return _find_pattern(A.rows)


@dataclass(frozen=True)
class Decision:
    extendable: bool
    witness: BasisMatrix | None = None
    reason: str | None = None
    short_vectors: int = 0
    reduced_bases: int = 0


def _coordinates(K: KernelLattice):
    # v = B c, recovered from an invertible row block of B
    _, rows = _rational.row_reduce([list(b) for b in K.basis])
    block = [[K.basis[j][r] for j in range(K.rank)] for r in rows]
    inv = _rational.inverse(block)

    def coords(v):
        return [sum(inv[i][j] * v[r] for j, r in enumerate(rows)) for i in range(K.rank)]
    return coords


def reduced_bases(K: KernelLattice, bound: int = DEFAULT_ENUMERATION_BOUND):
    """Yield every reduced lattice basis (as index tuples into the short vector list).

    Backtracking over the canonically sorted short vectors, pruning as soon
    as a row acquires a third nonzero.
    """
    S = enumerate_short_kernel_vectors(K, bound)
    k, d = K.rank, K.ambient_dim
    coords = _coordinates(K)
    C = [coords(v) for v in S]

    def rec(start, chosen, counts):
        if len(chosen) == k:
            if abs(_rational.det([C[i] for i in chosen])) == 1:
                yield tuple(chosen)
            return
        for i in range(start, len(S)):
            v = S[i]
            new = [c + (1 if x else 0) for c, x in zip(counts, v)]
            if max(new) > 2:
                continue
            yield from rec(i + 1, chosen + [i], new)

    return S, rec(0, [], [0] * d)


def _support(cols) -> int:
    return sum(1 for c in cols for x in c if x)


def decide_extendability(K: KernelLattice, bound: int = DEFAULT_ENUMERATION_BOUND,
                         rank_bound: int = DEFAULT_RANK_BOUND) -> Decision:
    """Complete decision: is there a reduced, pattern-free basis of the kernel lattice?

    Among all witnesses the one with the fewest nonzero entries is returned,
    ties broken by the lexicographically largest column list.
    """
    if K.rank > rank_bound:
        raise AmbientTooLarge(f"kernel rank {K.rank} exceeds bound {rank_bound}")
    if K.rank == 0:
        return Decision(True, BasisMatrix(()), None)
    S, gen = reduced_bases(K, bound)
    best = None
    n_reduced = 0
    for idx in gen:
        n_reduced += 1
        cols = [S[i] for i in idx]
        if _find_pattern(list(zip(*cols))) is not None:
            continue
        key = (_support(cols), [tuple(-x for x in c) for c in sorted(cols, reverse=True)])
        if best is None or key < best[0]:
            best = (key, sorted(cols, reverse=True))
    if best is not None:
        return Decision(True, BasisMatrix(tuple(best[1])), None, len(S), n_reduced)
    reason = ALL_BASES_CONTAIN_PATTERN if n_reduced else NO_REDUCED_BASIS
    return Decision(False, None, reason, len(S), n_reduced)


# ---------------------------------------------------------------- action tables

@dataclass(frozen=True, order=True)
class Factor:
    kind: str  # "h" for the kernel group, "g" for the quotient group
    index: int  # zero based

    def __str__(self) -> str:
        return f"{self.kind}{self.index + 1}"


@dataclass(frozen=True)
class CoordinateAction:
    left: Factor | None = None
    right: Factor | None = None

    def __post_init__(self):
        if self.left is not None and self.left == self.right:
            raise ValueError(f"factor {self.left} used on both sides of one coordinate")

    @property
    def factors(self) -> tuple[Factor, ...]:
        return tuple(f for f in (self.left, self.right) if f is not None)


_LINE = re.compile(r"q(?P<lhs>\d+)\s*<-\s*(?:(?P<lk>[hg])(?P<li>\d+)\s*\*\s*)?"
                   r"q(?P<q>\d+)(?:\s*\*\s*(?P<rk>[hg])(?P<ri>\d+)\^-1)?")


@dataclass(frozen=True)
class ActionTable:
    """Coordinate-wise action q_l -> a * q_l * b^-1 with a, b optional factors."""

    coords: tuple[CoordinateAction, ...]

    @property
    def d(self) -> int:
        return len(self.coords)

    def factors(self) -> list[Factor]:
        return sorted({f for c in self.coords for f in c.factors})

    def format_lines(self) -> list[str]:
        lines = []
        for i, c in enumerate(self.coords):
            parts = ([str(c.left)] if c.left else []) + [f"q{i + 1}"]
            if c.right:
                parts.append(f"{c.right}^-1")
            lines.append(f"q{i + 1} <- " + " * ".join(parts))
        return lines

    def format(self) -> str:
        return "\n".join(self.format_lines()) + "\n"

    @classmethod
    def parse(cls, text: str) -> "ActionTable":
        """Inverse of :meth:`format`; coordinates must appear in order q1, q2, ..."""
        coords = []
        for lineno, line in enumerate(text.strip().splitlines(), 1):
            m = _LINE.fullmatch(line.strip())
            if m is None or int(m["lhs"]) != lineno or int(m["q"]) != lineno:
                raise ParseError(f"line {lineno}: cannot parse action {line!r}")
            left = Factor(m["lk"], int(m["li"]) - 1) if m["lk"] else None
            right = Factor(m["rk"], int(m["ri"]) - 1) if m["rk"] else None
            try:
                coords.append(CoordinateAction(left, right))
            except ValueError as exc:
                raise ParseError(f"line {lineno}: {exc}") from None
        return cls(tuple(coords))

    def display(self) -> str:
        """Compact one-line form, e.g. ``(h1q1h2^-1, q2h2^-1)``."""
        out = []
        for i, c in enumerate(self.coords):
            s = (str(c.left) if c.left else "") + f"q{i + 1}"
            s += f"{c.right}^-1" if c.right else ""
            out.append(s)
        return "(" + ", ".join(out) + ")"

    def act(self, values, q):
        """Apply the action numerically; ``values`` maps Factor -> unit quaternion."""
        import numpy as np
        from .quatgeom import qinv, qmul
        q = np.asarray(q, dtype=float)
        out = q.copy()
        for i, c in enumerate(self.coords):
            if c.left is not None:
                out[i] = qmul(values[c.left], out[i])
            if c.right is not None:
                out[i] = qmul(out[i], qinv(values[c.right]))
        return out


def tables_equivalent(a: ActionTable, b: ActionTable) -> bool:
    """Equal up to relabelling factors within each kind and per-coordinate side swaps."""
    if a.d != b.d:
        return False
    fa, fb = a.factors(), b.factors()
    kinds = sorted({f.kind for f in fa})
    if kinds != sorted({f.kind for f in fb}):
        return False
    by_kind_a = {k: [f for f in fa if f.kind == k] for k in kinds}
    by_kind_b = {k: [f for f in fb if f.kind == k] for k in kinds}
    if any(len(by_kind_a[k]) != len(by_kind_b[k]) for k in kinds):
        return False
    target = [frozenset(c.factors) for c in b.coords]
    perms = [itertools.permutations(by_kind_b[k]) for k in kinds]
    for choice in itertools.product(*perms):
        mapping = {}
        for k, image in zip(kinds, choice):
            mapping.update(zip(by_kind_a[k], image))
        if all(frozenset(mapping[f] for f in c.factors) == t for c, t in zip(a.coords, target)):
            return True
    return False


def synthesize_nhat_action(B: BasisMatrix) -> ActionTable:
    """Action table of Sp(1)^k read off a reduced, pattern-free basis matrix.

    Two-nonzero rows put the lower column on the left and the higher on the
    right.  A single-nonzero row goes left unless its column is already used
    on the right somewhere.
    """
    rows = B.rows
    if not _reduced_rows(rows):
        raise NotReduced("basis matrix is not reduced")
    witness = _find_pattern(rows)
    if witness is not None:
        raise PatternPresent(f"obstruction at rows {witness[:2]}, columns {witness[2:]}")
    forced_right = set()
    for row in rows:
        nz = [j for j, x in enumerate(row) if x]
        if len(nz) == 2:
            forced_right.add(nz[1])
    coords = []
    for row in rows:
        nz = [j for j, x in enumerate(row) if x]
        if len(nz) == 2:
            coords.append(CoordinateAction(Factor("h", nz[0]), Factor("h", nz[1])))
        elif len(nz) == 1:
            f = Factor("h", nz[0])
            coords.append(CoordinateAction(right=f) if nz[0] in forced_right
                          else CoordinateAction(left=f))
        else:
            coords.append(CoordinateAction())
    return ActionTable(tuple(coords))


def is_simplex_cut(P) -> bool:
    """Normals drawn from +-e_i and +-(e_1 + ... + e_m): a simplex cut parallel to its facets."""
    m = P.dim
    allowed = set()
    for i in range(m):
        e = tuple(int(j == i) for j in range(m))
        allowed |= {e, tuple(-x for x in e)}
    allowed |= {(1,) * m, (-1,) * m}
    return all(v in allowed for v in P.normals)


def synthesize_ghat_action(P, nhat: ActionTable) -> ActionTable:
    """Extend an N-hat table by m quotient factors g_1..g_m.

    The g's sit on the free side of m coordinates that each carry at most one
    kernel factor and whose facet normals form a Z-basis; the first such
    coordinate set in lexicographic order is used.
    """
    m = P.dim
    if nhat.d != P.d:
        raise ValueError("table and polytope disagree on the number of coordinates")
    free = [i for i, c in enumerate(nhat.coords) if len(c.factors) < 2]
    if len(free) < m:
        raise Unsupported(
            f"only {len(free)} coordinates ({[i + 1 for i in free]}) have a free side; need {m}")
    normals = P.normals
    chosen = next((J for J in itertools.combinations(free, m)
                   if abs(_rational.det([normals[i] for i in J])) == 1), None)
    if chosen is None:
        raise Unsupported("no set of single-sided coordinates has unimodular facet normals")
    coords = list(nhat.coords)
    for n, i in enumerate(chosen):
        c = coords[i]
        g = Factor("g", n)
        coords[i] = CoordinateAction(g, c.right) if c.right is not None and c.left is None \
            else CoordinateAction(c.left, g)
    table = ActionTable(tuple(coords))
    report = generic_stabilizer(table, ())
    if not report.free:
        raise Unsupported("combined action has a nontrivial generic stabilizer")
    return table


# ---------------------------------------------------------------- stabilizers

@dataclass(frozen=True)
class StabilizerReport:
    free: bool
    unanchored_components: int
    # one nontrivial stabilizer element per unanchored component: all its factors = -1
    central_elements: tuple[tuple[Factor, ...], ...]
    # factors touching no nonzero coordinate: their whole Sp(1) fixes the point
    idle: tuple[Factor, ...] = ()


def generic_stabilizer(table: ActionTable, zero_set: Iterable[int]) -> StabilizerReport:
    zero = set(zero_set)
    live = [c for i, c in enumerate(table.coords) if i not in zero]
    nodes = sorted({f for c in live for f in c.factors})
    parent = {f: f for f in nodes}

    def find(f):
        while parent[f] != f:
            parent[f] = parent[parent[f]]
            f = parent[f]
        return f

    anchored = set()
    for c in live:
        if c.left is not None and c.right is not None:
            parent[find(c.left)] = find(c.right)
        elif c.factors:
            anchored.add(c.factors[0])
    comps: dict[Factor, list[Factor]] = {}
    for f in nodes:
        comps.setdefault(find(f), []).append(f)
    bad = [tuple(members) for members in comps.values() if not anchored.intersection(members)]
    idle = tuple(f for f in table.factors() if f not in parent)
    n_bad = len(bad) + len(idle)
    return StabilizerReport(n_bad == 0, n_bad, tuple(sorted(bad)), idle)


@dataclass(frozen=True)
class TorusStabilizer:
    divisors: tuple[int, ...]
    rank: int
    kernel_rank: int

    @property
    def trivial(self) -> bool:
        return self.rank == self.kernel_rank and all(x == 1 for x in self.divisors)


def torus_stabilizer(K: KernelLattice, zero_set: Iterable[int]) -> TorusStabilizer:
    """Stabilizer in N of a point whose zero coordinates are ``zero_set``.

    With N = R^k/Z^k embedded by the basis B, the stabilizer is
    {t : B_J t in Z^|J|} where J are the nonzero coordinates; its torsion is
    read off the Smith form of B_J.
    """
    zero = set(zero_set)
    rows = [tuple(b[i] for b in K.basis) for i in range(K.ambient_dim) if i not in zero]
    if not rows or K.rank == 0:
        return TorusStabilizer((), 0, K.rank)
    snf = smith_normal_form(IntMatrix(tuple(rows)))
    return TorusStabilizer(tuple(x for x in snf.divisors if x), snf.rank, K.rank)


def homogeneity_rank(rank_G: int, rank_H: int, dim_M: int, dim_G: int, dim_H: int) -> int:
    return rank_G - rank_H - dim_M + dim_G - dim_H
