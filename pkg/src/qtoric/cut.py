"""Cuts of polytopes parallel to a facet, and the matching moment-map bookkeeping."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ImproperCut, NonRegularValue, NotDelzantAfterCut, QtoricError
from .lattice import KernelLattice, kernel_lattice, projection_from_normals, same_lattice
from .momentgeo import sample_level_set
from .polytope import (Facet, HRepPolytope, enumerate_vertices, redundant_facets,
                       verify_delzant)
from .quatgeom import qnorm2, random_unit_quaternions


@dataclass(frozen=True)
class CutSpec:
    facet_index: int  # zero based
    level: Fraction

    def __post_init__(self):
        if isinstance(self.level, float):
            raise TypeError("cut level must be an exact rational")
        object.__setattr__(self, "level", Fraction(self.level))


@dataclass(frozen=True)
class CutResult:
    polytope: HRepPolytope  # redundant facets dropped
    full: HRepPolytope  # input facets followed by the new one, d + 1 facets
    spec: CutSpec
    kernel: KernelLattice  # of ``full``, in block form
    old_kernel: KernelLattice
    dropped: tuple[int, ...]  # indices into ``full`` of facets that became redundant


def _block_kernel(old: KernelLattice, j: int) -> KernelLattice:
    d = old.ambient_dim
    padded = [b + (0,) for b in old.basis]
    new = tuple(int(i == j or i == d) for i in range(d + 1))
    return KernelLattice(d + 1, tuple(padded) + (new,))


def polytope_cut(P: HRepPolytope, spec: CutSpec) -> CutResult:
    """Add the facet <x, -v_j> <= a, keeping the side of P where <x, v_j> >= -a."""
    j, a = spec.facet_index, spec.level
    if not 0 <= j < P.d:
        raise QtoricError(f"facet index {j} out of range for {P.d} facets")
    new = Facet(tuple(-v for v in P.facets[j].normal), a)
    sides = [a - sum(Fraction(-c) * x for c, x in zip(P.facets[j].normal, v.point))
             for v in enumerate_vertices(P)]
    if not (any(s > 0 for s in sides) and any(s < 0 for s in sides)):
        raise ImproperCut(f"hyperplane <x, {new.normal}> = {a} does not separate the vertices of P")
    full = HRepPolytope(P.dim, P.facets + (new,), P.name and f"{P.name}_cut{j}_{a}")
    if full.d != P.d + 1:
        raise ImproperCut("cut repeats an existing facet")
    report = verify_delzant(full)
    if not report.is_delzant:
        bad = report.failures[0]
        raise NotDelzantAfterCut(
            f"vertex {tuple(map(str, bad.vertex.point))} fails (active {bad.vertex.active_set})")
    old = kernel_lattice(projection_from_normals(P))
    block = _block_kernel(old, j)
    computed = kernel_lattice(projection_from_normals(full))
    if not same_lattice(block.basis, computed.basis):
        raise AssertionError("new kernel is not the direct sum of the old one and a rank-one block")
    dropped = tuple(redundant_facets(full))
    pruned = HRepPolytope(P.dim, tuple(f for i, f in enumerate(full.facets) if i not in dropped),
                          full.name)
    return CutResult(pruned, full, spec, block, old, dropped)


def cut_chain(P: HRepPolytope, specs) -> HRepPolytope:
    """Apply several cuts in turn; facet indices refer to the running polytope."""
    for s in specs:
        P = polytope_cut(P, s).polytope
    return P


# ---------------------------------------------------------------- moment consistency

def _linear_sigma(result: CutResult):
    """Both sides of the composed identity as exact linear forms in (w_1..w_{d+1}, 1), w = |q|^4."""
    full, j = result.full, result.spec.facet_index
    d = full.d
    lam = full.offsets

    def sigma_form(l):  # -w_l / 4 + lambda_l
        f = [Fraction(0)] * (d + 1)
        f[l] = Fraction(-1, 4)
        f[d] = lam[l]
        return f

    def combo(b):
        return [sum(b[l] * sigma_form(l)[k] for l in range(d)) for k in range(d + 1)]

    direct = [combo(b) for b in result.kernel.basis]
    composed = [combo(b) for b in result.kernel.basis[:-1]]
    h = sigma_form(j)
    last = [Fraction(0)] * (d + 1)
    last[d - 1] = Fraction(-1, 4)
    last[d] = result.spec.level
    composed.append([x + y for x, y in zip(h, last)])
    return direct, composed


def cut_moment_identity_exact(result: CutResult) -> bool:
    """The composed formula equals the block-kernel restriction of sigma as exact linear forms."""
    direct, composed = _linear_sigma(result)
    return direct == composed


@dataclass(frozen=True)
class CutConsistency:
    residual: float  # composed formula vs direct restriction, per sample
    level_residual: float  # direct restriction vs the constants it should equal
    samples: int


def cut_moment_consistency(P: HRepPolytope, result: CutResult, n: int = 1000, seed: int = 42,
                           sign: float = 1.0) -> CutConsistency:
    """Sample the new level set and compare both ways of writing its moment map.

    ``sign = -1`` flips the quartic term of the new component (negative control).
    """
    full, j = result.full, result.spec.facet_index
    S = sample_level_set(full, result.kernel, n, seed)
    lam = np.array([float(o) for o in full.offsets])
    w = qnorm2(S.points) ** 2  # (n, d + 1)
    sigma = -0.25 * w + lam
    B = np.array(result.kernel.basis, dtype=float)
    direct = sigma @ B.T
    old_B = np.array(result.old_kernel.basis, dtype=float).reshape(-1, P.d)
    old_sigma = sigma[:, :-1]
    h = old_sigma[:, j]
    new = h - sign * 0.25 * w[:, -1] + float(result.spec.level)
    composed = np.column_stack([old_sigma @ old_B.T, new]) if len(old_B) else new[:, None]
    return CutConsistency(float(np.max(np.abs(direct - composed))),
                          float(np.max(np.abs(direct))), n)


# ---------------------------------------------------------------- level set of the cut function

@dataclass(frozen=True)
class LevelSetReport:
    epsilon: float
    empty: bool
    upper: int  # samples with h > eps, lifted to |q|^2 = 2 sqrt(h - eps)
    boundary: int  # samples on h = eps, lifted to q = 0
    excluded: int  # samples with h < eps, not in the level set
    relation_residual: float
    level_residual: float


def cut_level_set_decomposition(h_samples, epsilon: float, tol: float = 1e-9,
                                seed: int = 42) -> LevelSetReport:
    """Split F^-1(eps), F = h - |q|^4 / 4, into M_{h > eps} x S^3 and h^-1(eps)."""
    h = np.asarray(h_samples, dtype=float)
    hmax, hmin = float(h.max()), float(h.min())
    if abs(epsilon - hmax) <= tol or abs(epsilon - hmin) <= tol:
        raise NonRegularValue(f"eps = {epsilon} is an extreme value of h")
    if epsilon > hmax:
        return LevelSetReport(epsilon, True, 0, 0, len(h), 0.0, 0.0)
    rng = np.random.default_rng(seed)
    upper = h - epsilon > tol
    boundary = np.abs(h - epsilon) <= tol
    radius2 = np.where(upper, 2.0 * np.sqrt(np.clip(h - epsilon, 0.0, None)), 0.0)
    q = np.sqrt(radius2)[:, None] * random_unit_quaternions(rng, (len(h),))
    keep = upper | boundary
    F = h - 0.25 * qnorm2(q) ** 2
    rel = np.abs(qnorm2(q[upper]) - 2.0 * np.sqrt(h[upper] - epsilon))
    rel = float(rel.max(initial=0.0))
    rel = max(rel, float(np.abs(q[boundary]).max(initial=0.0)))
    lvl = float(np.abs(F[keep] - epsilon).max(initial=0.0))
    return LevelSetReport(epsilon, False, int(upper.sum()), int(boundary.sum()),
                          int((~keep).sum()), rel, lvl)


def hp2_first_component_samples(n: int, epsilon: float, seed: int = 42,
                                 boundary_fraction: float = 0.2) -> np.ndarray:
    """Values of h = sigma_1 on seeded points of HP^2, a share of them placed on h = eps."""
    rng = np.random.default_rng(seed)
    q = rng.standard_normal((n, 3, 4))
    w = qnorm2(q) ** 2
    h = -w[:, 0] / w.sum(axis=1)
    nb = int(boundary_fraction * n)
    if nb and -1 < epsilon < 0:
        # |q1|^4 = -eps * total: rescale q1 against the other two coordinates
        rest = w[:nb, 1:].sum(axis=1)
        target = -epsilon * rest / (1 + epsilon)
        q[:nb, 0] *= ((target / w[:nb, 0]) ** 0.25)[:, None]
        w = qnorm2(q) ** 2
        h = -w[:, 0] / w.sum(axis=1)
    return h
