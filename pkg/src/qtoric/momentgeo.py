"""Level sets, sampled moment images, catalog models and hull certificates."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, Delaunay, QhullError

from . import exactlp
from .errors import (InconsistentSystem, InvalidSampleCount, NotOnLevelSet, OutsidePolytope,
                     QtoricError, ZeroHomogeneousVector)
from .lattice import KernelLattice
from .polytope import HRepPolytope, bounding_box, enumerate_vertices
from .quatgeom import qnorm2, random_unit_quaternions

LEVEL_TOL = 1e-9


def _float_data(P: HRepPolytope) -> tuple[np.ndarray, np.ndarray]:
    return np.array(P.normals, dtype=float), np.array([float(o) for o in P.offsets])


# ---------------------------------------------------------------- level sets

def solve_radii(P: HRepPolytope, x, tol: float = LEVEL_TOL) -> np.ndarray:
    """Moduli |q_l| = (4 (lambda_l - <x, v_l>))^(1/4), zero on the active facets."""
    if len(x) != P.dim:
        raise QtoricError(f"point of length {len(x)} in dimension {P.dim}")
    if all(isinstance(v, (int, Fraction)) for v in x):
        slack = np.array([float(f.slack(x)) for f in P.facets])
        if np.any(slack < 0):
            raise OutsidePolytope(f"{list(map(str, x))} violates facets {np.flatnonzero(slack < 0).tolist()}")
    else:
        V, lam = _float_data(P)
        slack = lam - V @ np.asarray(x, dtype=float)
        if np.any(slack < -tol):
            raise OutsidePolytope(f"{x} violates facets {np.flatnonzero(slack < -tol).tolist()}")
        slack = np.clip(slack, 0.0, None)
    return (4.0 * slack) ** 0.25


@dataclass(frozen=True)
class SampleSet:
    seed: int
    points: np.ndarray  # (n, d, 4) points of Z
    images: np.ndarray  # (n, d) values of sigma with C = lambda
    projections: np.ndarray  # (n, m) recovered points of P
    sources: np.ndarray  # (n, m) the points of P the samples were built from
    level_residual: float = 0.0


def level_residual(K: KernelLattice, sigma: np.ndarray) -> np.ndarray:
    """|B^T sigma| per sample, i.e. the restriction of sigma to the kernel algebra."""
    B = np.array(K.basis, dtype=float).reshape(K.rank, -1)
    return np.abs(np.atleast_2d(sigma) @ B.T).max(axis=-1) if K.rank else np.zeros(len(np.atleast_2d(sigma)))


def uniform_in_polytope(P: HRepPolytope, rng: np.random.Generator, max_tries: int = 100000) -> np.ndarray:
    lo, hi = (np.array([float(v) for v in b]) for b in bounding_box(P))
    V, lam = _float_data(P)
    for _ in range(max_tries):
        x = rng.uniform(lo, hi)
        if np.all(V @ x <= lam):
            return x
    raise QtoricError("rejection sampling did not hit the polytope")


def lift_point(P: HRepPolytope, x, rng: np.random.Generator) -> np.ndarray:
    """A point of Z over x: moduli from the slacks, independent uniform phases."""
    r = solve_radii(P, x)
    return r[:, None] * random_unit_quaternions(rng, (P.d,))


def sample_level_set(P: HRepPolytope, K: KernelLattice, n: int, seed: int = 42,
                     tol: float = LEVEL_TOL) -> SampleSet:
    """n seeded points of Z = (i* o sigma)^-1(0) with C = (lambda_1, ..., lambda_d).

    Point i uses its own generator ``default_rng([seed, i])`` so any prefix of
    the sample is reproducible on its own.
    """
    if n < 1:
        raise InvalidSampleCount(f"need at least one sample, got {n}")
    _, lam = _float_data(P)
    pts, xs = [], []
    for i in range(n):
        rng = np.random.default_rng([seed, i])
        x = uniform_in_polytope(P, rng)
        xs.append(x)
        pts.append(lift_point(P, x, rng))
    points = np.stack(pts)
    images = -0.25 * qnorm2(points) ** 2 + lam
    res = level_residual(K, images)
    scale = 1.0 + float(np.max(np.abs(lam)))
    if np.any(res > tol * scale):
        raise NotOnLevelSet(f"sample violates the level set by {res.max():.3g}")
    proj = np.stack([project_to_polytope(K, P, q, tol) for q in points])
    return SampleSet(seed, points, images, proj, np.stack(xs), float(res.max()))


def project_to_polytope(K: KernelLattice, P: HRepPolytope, q, tol: float = LEVEL_TOL) -> np.ndarray:
    """Solve pi^* x = sigma(q) for x; sigma has C = lambda."""
    q = np.asarray(q, dtype=float).reshape(P.d, 4)
    V, lam = _float_data(P)
    sigma = -0.25 * qnorm2(q) ** 2 + lam
    scale = 1.0 + float(np.max(np.abs(lam)))
    if level_residual(K, sigma).max(initial=0.0) > tol * scale:
        raise NotOnLevelSet("point is not on the level set Z")
    x, *_ = np.linalg.lstsq(V, sigma, rcond=None)
    if np.max(np.abs(V @ x - sigma)) > tol * scale:
        raise InconsistentSystem("pi^* x = sigma(q) has no solution")
    return x


def euler_characteristic(P: HRepPolytope) -> int:
    """Number of torus fixed points of the associated manifold, i.e. the vertex count."""
    return len(enumerate_vertices(P))


# ---------------------------------------------------------------- catalog models

@dataclass(frozen=True)
class HPm:
    m: int


@dataclass(frozen=True)
class ProductHP1:
    m: int


@dataclass(frozen=True)
class BlowupHP2:
    alpha1: float = 0.0
    alpha2: float = 0.0
    alpha3: float = 0.0

    def __post_init__(self):
        if not all(0 <= a <= 1 for a in self.alphas):
            raise QtoricError("blow-up parameters must lie in [0, 1]")

    @property
    def alphas(self) -> tuple[float, float, float]:
        return (self.alpha1, self.alpha2, self.alpha3)


@dataclass(frozen=True)
class PolytopeQuotient:
    polytope: HRepPolytope
    kernel: KernelLattice


class BlowupPoint(NamedTuple):
    """[q1:q2:q3] with directions p ~ (q1, q3), r ~ (q2, q3), s ~ (q1, q2)."""
    q: np.ndarray
    p: np.ndarray
    r: np.ndarray
    s: np.ndarray


def _fractions(w: np.ndarray) -> np.ndarray:
    tot = w.sum(axis=-1, keepdims=True)
    if np.any(tot == 0):
        raise ZeroHomogeneousVector("all homogeneous coordinates vanish")
    return w / tot


def _hp_weights(w: np.ndarray, m: int) -> np.ndarray:
    return -_fractions(w)[..., :m]


def _blowup_weights(M: BlowupHP2, wq, wp, wr, ws) -> np.ndarray:
    a1, a2, a3 = M.alphas
    Q, Pf, R, S = (_fractions(w) for w in (wq, wp, wr, ws))
    s1 = -Q[..., 0] - a1 * Pf[..., 0] - a3 * S[..., 0]
    s2 = -Q[..., 1] - a2 * R[..., 0] - a3 * S[..., 1]
    return 0.25 * np.stack([s1, s2], axis=-1)


def model_moment(M, point) -> np.ndarray:
    """Evaluate the displayed tri-moment formula of a catalog model."""
    return _moment_from_weights(M, point, lambda a: qnorm2(a) ** 2)


def _moment_from_weights(M, point, weight) -> np.ndarray:
    if isinstance(M, HPm):
        q = np.asarray(point, dtype=float)
        return _hp_weights(weight(q), M.m)
    if isinstance(M, ProductHP1):
        q = np.asarray(point, dtype=float)  # (m, 2, 4)
        return -_fractions(weight(q))[..., 0]
    if isinstance(M, BlowupHP2):
        b = point if isinstance(point, BlowupPoint) else BlowupPoint(*point)
        return _blowup_weights(M, *(weight(np.asarray(a, dtype=float)) for a in b))
    if isinstance(M, PolytopeQuotient):
        return project_to_polytope(M.kernel, M.polytope, point)
    raise TypeError(f"unknown model {M!r}")


def blowup_point(q, rng: np.random.Generator | None = None) -> BlowupPoint:
    """The point of the blow-up over [q1:q2:q3]; at a blown-up point the direction is random."""
    q = np.asarray(q, dtype=float)
    rng = rng or np.random.default_rng(0)

    def direction(a, b):
        v = np.stack([a, b])
        if not v.any():
            v = random_unit_quaternions(rng, (2,)) * rng.uniform(0, 1, (2, 1))
        return v
    return BlowupPoint(q, direction(q[0], q[2]), direction(q[1], q[2]), direction(q[0], q[1]))


def sample_model(M, n: int, seed: int = 42) -> list:
    """n seeded points of a catalog model, including points on coordinate strata."""
    if n < 1:
        raise InvalidSampleCount(f"need at least one sample, got {n}")
    out = []
    for i in range(n):
        rng = np.random.default_rng([seed, i])
        if isinstance(M, HPm):
            q = rng.standard_normal((M.m + 1, 4))
            q *= rng.uniform(size=(M.m + 1, 1)) > 0.1
            if not q.any():
                q[-1] = random_unit_quaternions(rng)
            out.append(q)
        elif isinstance(M, ProductHP1):
            q = rng.standard_normal((M.m, 2, 4))
            q *= rng.uniform(size=(M.m, 2, 1)) > 0.1
            for f in range(M.m):
                if not q[f].any():
                    q[f, rng.integers(2)] = random_unit_quaternions(rng)
            out.append(q)
        elif isinstance(M, BlowupHP2):
            q = rng.standard_normal((3, 4))
            u = rng.uniform()
            if u < 0.3:  # a point of an exceptional divisor
                keep = int(rng.integers(3))
                q = np.zeros((3, 4))
                q[keep] = random_unit_quaternions(rng)
            out.append(blowup_point(q, rng))
        elif isinstance(M, PolytopeQuotient):
            x = uniform_in_polytope(M.polytope, rng)
            out.append(lift_point(M.polytope, x, rng))
        else:
            raise TypeError(f"unknown model {M!r}")
    return out


def fixed_point_images(M) -> np.ndarray:
    """Images of the torus fixed points."""
    if isinstance(M, HRepPolytope):
        return np.array([[float(c) for c in v.point] for v in enumerate_vertices(M)])
    if isinstance(M, PolytopeQuotient):
        return fixed_point_images(M.polytope)
    if isinstance(M, HPm):
        pts = np.vstack([-np.eye(M.m), np.zeros(M.m)])
        return pts
    if isinstance(M, ProductHP1):
        grid = np.array(np.meshgrid(*[[0.0, -1.0]] * M.m, indexing="ij"))
        return grid.reshape(M.m, -1).T
    if isinstance(M, BlowupHP2):
        a1, a2, a3 = M.alphas
        pts = [(-1 - a1 - a3, -a2), (-1 - a1 - a3, 0.0), (-a1, -1 - a2 - a3),
               (0.0, -1 - a2 - a3), (-a3, 0.0), (0.0, -a3)]
        return 0.25 * np.array(pts)
    raise TypeError(f"unknown model {M!r}")


# ---------------------------------------------------------------- alpha factorization

def alpha_map(q) -> tuple[np.ndarray, np.ndarray]:
    """q = x + y I with y >= 0 maps to (x + y i)^2; returns the values and a mask of y = 0."""
    q = np.asarray(q, dtype=float)
    x = q[..., 0]
    y = np.linalg.norm(q[..., 1:], axis=-1)
    return (x + 1j * y) ** 2, y == 0


@dataclass(frozen=True)
class AlphaCheck:
    residual: float
    ambiguous: int  # coordinates with y = 0, where I is undefined


def alpha_factorization_check(M, points: Sequence) -> AlphaCheck:
    """Max |sigma(q) - nu(alpha(q))| where nu is the complex moment map of the same model."""
    worst, amb = 0.0, 0
    for pt in points:
        parts = pt if isinstance(pt, BlowupPoint) else [pt]
        for part in parts:
            amb += int(alpha_map(part)[1].sum())
        sigma = model_moment(M, pt)
        nu = _moment_from_weights(M, pt, lambda a: np.abs(alpha_map(a)[0]) ** 2)
        worst = max(worst, float(np.max(np.abs(sigma - nu))))
    return AlphaCheck(worst, amb)


# ---------------------------------------------------------------- hull certificates

@dataclass(frozen=True)
class HullCertificate:
    point: tuple
    generators: tuple
    inside: bool
    weights: tuple | None = None
    functional: tuple | None = None  # c with <c, x> > max_i <c, a_i>
    margin: float | Fraction | None = None
    residual: float | Fraction = 0.0
    exact: bool = field(default=False)


def _is_exact(values) -> bool:
    return all(isinstance(v, (int, Fraction)) for row in values for v in row)


def hull_membership(A, x, tol: float = 1e-7) -> HullCertificate:
    """Convex-combination weights for x, or a separating functional.

    Rational input is decided exactly; float input by LP with tolerance.
    """
    A = [tuple(a) for a in A]
    if not A:
        raise QtoricError("empty generator set")
    x = tuple(x)
    if _is_exact(A) and _is_exact([x]):
        return _hull_exact(A, x)
    Af = np.array(A, dtype=float)
    xf = np.array(x, dtype=float)
    n, m = Af.shape
    # min sum |residual| s.t. A^T w + s+ - s- = x, sum w = 1, all variables >= 0
    eq = np.zeros((m + 1, n + 2 * m))
    eq[:m, :n] = Af.T
    eq[:m, n:n + m] = np.eye(m)
    eq[:m, n + m:] = -np.eye(m)
    eq[m, :n] = 1.0
    cost = np.r_[np.zeros(n), np.ones(2 * m)]
    res = linprog(cost, A_eq=eq, b_eq=np.r_[xf, 1.0], bounds=(0, None), method="highs")
    if res.status == 0:
        w = res.x[:n]
        residual = float(np.max(np.abs(Af.T @ w - xf), initial=0.0))
        if residual <= tol:
            return HullCertificate(x, tuple(A), True, tuple(w), residual=residual)
    # separator: max <c, x> - t  s.t. <c, a_i> <= t, -1 <= c <= 1
    cost = np.r_[-xf, 1.0]
    ub = np.c_[Af, -np.ones(n)]
    res = linprog(cost, A_ub=ub, b_ub=np.zeros(n),
                  bounds=[(-1, 1)] * m + [(None, None)], method="highs")
    c, t = res.x[:m], res.x[m]
    margin = float(c @ xf - t)
    if margin <= tol:
        # numerically on the boundary; accept with the residual from the first LP
        return HullCertificate(x, tuple(A), True, None, residual=margin)
    return HullCertificate(x, tuple(A), False, None, tuple(c), margin)


def hull_membership_many(A, X, tol: float = 1e-7) -> list[HullCertificate]:
    """Certificates for many float points.

    Barycentric coordinates in a Delaunay triangulation of A give convex
    weights directly; points it cannot place fall back to the LPs.
    """
    Af = np.array(A, dtype=float)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    try:
        tri = Delaunay(Af) if Af.shape[1] > 1 else None
    except QhullError:
        tri = None
    if tri is None:
        return [hull_membership(A, x, tol) for x in X]
    gens = tuple(tuple(a) for a in A)
    m = Af.shape[1]
    simplex = tri.find_simplex(X, tol=tol)
    out = []
    for x, s in zip(X, simplex):
        if s >= 0:
            T = tri.transform[s]
            b = T[:m] @ (x - T[m])
            local = np.r_[b, 1.0 - b.sum()]
            w = np.zeros(len(Af))
            w[tri.simplices[s]] = local
            residual = float(np.max(np.abs(Af.T @ w - x)))
            if local.min() >= -tol and residual <= tol:
                out.append(HullCertificate(tuple(x), gens, True, tuple(np.clip(w, 0.0, None)),
                                           residual=residual))
                continue
        out.append(hull_membership(A, tuple(x), tol))
    return out


def _hull_exact(A, x) -> HullCertificate:
    n, m = len(A), len(x)
    rows = [[Fraction(A[i][k]) for i in range(n)] for k in range(m)] + [[Fraction(1)] * n]
    rhs = [Fraction(v) for v in x] + [Fraction(1)]
    lp = exactlp.feasible(rows, rhs)
    if lp.status == "optimal":
        return HullCertificate(x, tuple(A), True, tuple(lp.x), residual=Fraction(0), exact=True)
    y = lp.farkas
    c = tuple(y[:m])
    # y.[A^T; 1] <= 0 and y.[x; 1] > 0, so <c, x> > -y_last >= <c, a_i>
    top = max(sum(ci * Fraction(a) for ci, a in zip(c, ai)) for ai in A)
    margin = sum(ci * Fraction(v) for ci, v in zip(c, x)) - top
    return HullCertificate(x, tuple(A), False, None, c, margin, exact=True)


# ---------------------------------------------------------------- planar comparison

def _point_polygon_distance(p: np.ndarray, hull: ConvexHull) -> float:
    if np.all(hull.equations[:, :2] @ p + hull.equations[:, 2] <= 1e-12):
        return 0.0
    best = np.inf
    for a_idx, b_idx in hull.simplices:
        a, b = hull.points[a_idx], hull.points[b_idx]
        ab = b - a
        t = np.clip((p - a) @ ab / (ab @ ab), 0.0, 1.0)
        best = min(best, float(np.linalg.norm(p - (a + t * ab))))
    return best


def hausdorff_to_polytope(points: np.ndarray, P: HRepPolytope) -> float:
    """Hausdorff distance between the convex hull of planar points and P."""
    if P.dim != 2:
        raise QtoricError("planar comparison only")
    hull = ConvexHull(np.asarray(points, dtype=float))
    target = ConvexHull(fixed_point_images(P))
    # both sets are convex polygons, so the extreme points decide each direction
    there = max(_point_polygon_distance(p, target) for p in hull.points[hull.vertices])
    back = max(_point_polygon_distance(v, hull) for v in target.points[target.vertices])
    return max(there, back)
