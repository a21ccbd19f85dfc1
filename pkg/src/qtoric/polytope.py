"""Exact H-representation polytopes, vertex enumeration and the Delzant test.

A polytope is ``{x : <x, v_i> <= lambda_i}`` with primitive integer normals
``v_i`` and exact rational offsets.  Points of the dual space are stored as
plain vectors with the standard pairing.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from . import _rational, exactlp
from .errors import Degenerate, DimensionMismatch, QtoricError, Unbounded

RationalVector = tuple[Fraction, ...]


def _as_fraction(x) -> Fraction:
    if isinstance(x, float):
        raise TypeError("floating point values are not accepted; use exact rationals")
    return Fraction(x)


@dataclass(frozen=True)
class Facet:
    normal: tuple[int, ...]
    offset: Fraction

    def __post_init__(self):
        normal = tuple(self.normal)
        if any(Fraction(v).denominator != 1 for v in normal):
            raise QtoricError(f"facet normal must be integral: {normal}")
        normal = tuple(int(v) for v in normal)
        if not any(normal):
            raise QtoricError("facet normal must be nonzero")
        offset = _as_fraction(self.offset)
        g = math.gcd(*normal)
        if g != 1:
            normal = tuple(v // g for v in normal)
            offset = offset / g
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "offset", offset)

    def slack(self, x: Sequence) -> Fraction:
        return self.offset - sum(Fraction(a) * b for a, b in zip(x, self.normal))


@dataclass(frozen=True)
class HRepPolytope:
    dim: int
    facets: tuple[Facet, ...]
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        facets = []
        for f in self.facets:
            if not isinstance(f, Facet):
                f = Facet(*f)
            if len(f.normal) != self.dim:
                raise DimensionMismatch(
                    f"facet normal {f.normal} does not live in dimension {self.dim}")
            if f not in facets:
                facets.append(f)
        object.__setattr__(self, "facets", tuple(facets))

    @classmethod
    def from_data(cls, normals: Iterable[Sequence[int]], offsets: Iterable,
                  name: str | None = None) -> "HRepPolytope":
        normals = [tuple(v) for v in normals]
        if not normals:
            raise QtoricError("a polytope needs at least one facet")
        facets = tuple(Facet(v, _as_fraction(o)) for v, o in zip(normals, offsets, strict=True))
        return cls(len(normals[0]), facets, name)

    @property
    def d(self) -> int:
        return len(self.facets)

    @property
    def normals(self) -> list[tuple[int, ...]]:
        return [f.normal for f in self.facets]

    @property
    def offsets(self) -> list[Fraction]:
        return [f.offset for f in self.facets]

    @property
    def parallel_redundant(self) -> list[int]:
        """Indices of facets whose normal repeats with a smaller offset elsewhere."""
        out = []
        for i, f in enumerate(self.facets):
            for j, g in enumerate(self.facets):
                if i != j and f.normal == g.normal and (g.offset < f.offset
                                                        or (g.offset == f.offset and j < i)):
                    out.append(i)
                    break
        return out

    def facet_set(self) -> frozenset[Facet]:
        return frozenset(self.facets)

    def with_name(self, name: str | None) -> "HRepPolytope":
        return HRepPolytope(self.dim, self.facets, name)


@dataclass(frozen=True)
class Vertex:
    point: RationalVector
    active_set: tuple[int, ...]


@dataclass(frozen=True)
class VertexCheck:
    vertex: Vertex
    simple: bool
    rational: bool
    smooth: bool
    determinant: int | None
    edges: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class DelzantReport:
    checks: tuple[VertexCheck, ...]

    @property
    def is_delzant(self) -> bool:
        return all(c.simple and c.rational and c.smooth for c in self.checks)

    @property
    def failures(self) -> list[VertexCheck]:
        return [c for c in self.checks if not (c.simple and c.rational and c.smooth)]


def contains_point(P: HRepPolytope, x: Sequence) -> bool:
    if len(x) != P.dim:
        raise DimensionMismatch(f"point of length {len(x)} in a polytope of dimension {P.dim}")
    x = [_as_fraction(v) for v in x]
    return all(f.slack(x) >= 0 for f in P.facets)


def is_bounded(P: HRepPolytope) -> bool:
    """True iff the normals positively span R^m.

    Equivalent to: rank m, and sum mu_i v_i = 0 for some mu >= 1.
    """
    V = [list(col) for col in zip(*P.normals)]  # m x d
    if _rational.rank(V) < P.dim:
        return False
    rhs = [-sum(row) for row in V]
    return exactlp.feasible(V, rhs).status == "optimal"


@functools.lru_cache(maxsize=256)
def _vertices(P: HRepPolytope) -> tuple[Vertex, ...]:
    m = P.dim
    if P.d < m + 1 or not is_bounded(P):
        raise Unbounded(f"polytope {P.name or ''} has a recession direction".strip())
    normals, offsets = P.normals, P.offsets
    seen: dict[RationalVector, None] = {}
    for subset in itertools.combinations(range(P.d), m):
        x = _rational.solve([normals[i] for i in subset], [offsets[i] for i in subset])
        if x is None:
            continue
        pt = tuple(x)
        if pt in seen:
            continue
        if all(f.slack(pt) >= 0 for f in P.facets):
            seen[pt] = None
    if not seen:
        raise Degenerate("facet inequalities have no common vertex")
    pts = sorted(seen)
    if len(pts) < m + 1 or _rational.rank([[a - b for a, b in zip(p, pts[0])] for p in pts[1:]]) < m:
        raise Degenerate("polytope has empty interior")
    return tuple(
        Vertex(p, tuple(i for i, f in enumerate(P.facets) if f.slack(p) == 0)) for p in pts)


def enumerate_vertices(P: HRepPolytope) -> list[Vertex]:
    """Every vertex once, with exact coordinates and full active sets."""
    return list(_vertices(P))


def _primitive(v: Sequence[Fraction]) -> tuple[int, ...]:
    lcm = math.lcm(*(Fraction(x).denominator for x in v))
    ints = [int(Fraction(x) * lcm) for x in v]
    g = math.gcd(*ints) or 1
    return tuple(x // g for x in ints)


def verify_delzant(P: HRepPolytope) -> DelzantReport:
    checks = []
    for vx in enumerate_vertices(P):
        simple = len(vx.active_set) == P.dim
        det = None
        edges: tuple[tuple[int, ...], ...] = ()
        smooth = False
        if simple:
            rows = [P.facets[i].normal for i in vx.active_set]
            det = int(_rational.det(rows))
            # edge u_k leaves facet k and stays on the others: rows @ U = -I
            inv = _rational.inverse(rows)
            edges = tuple(_primitive([-inv[r][k] for r in range(P.dim)]) for k in range(P.dim))
            smooth = abs(det) == 1
        # integral normals make every edge direction rational
        checks.append(VertexCheck(vx, simple, True, smooth, det, edges))
    return DelzantReport(tuple(checks))


def bounding_box(P: HRepPolytope) -> tuple[RationalVector, RationalVector]:
    pts = [v.point for v in enumerate_vertices(P)]
    lo = tuple(min(p[k] for p in pts) for k in range(P.dim))
    hi = tuple(max(p[k] for p in pts) for k in range(P.dim))
    return lo, hi


def redundant_facets(P: HRepPolytope) -> list[int]:
    """Facets whose hyperplane touches the polytope in less than a facet."""
    verts = enumerate_vertices(P)
    out = []
    for i, f in enumerate(P.facets):
        on = [v.point for v in verts if i in v.active_set]
        if len(on) < P.dim or _rational.rank(
                [[a - b for a, b in zip(p, on[0])] for p in on[1:]]) < P.dim - 1:
            out.append(i)
    return out
