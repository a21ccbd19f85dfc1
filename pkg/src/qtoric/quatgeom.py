"""Quaternions and the flat 4-plectic calculus on H^d.

Quaternions are numpy arrays with a trailing axis of length 4 holding the
components along 1, i, j, k.  A point of H^d is a ``(d, 4)`` array; tangent
vectors and covectors are flat arrays of length ``4 d`` in the coordinates
x_1, ..., x_{4d}.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionMismatch, NotOnSphere, ZeroInverse

ONE = np.array([1.0, 0.0, 0.0, 0.0])
I = np.array([0.0, 1.0, 0.0, 0.0])
J = np.array([0.0, 0.0, 1.0, 0.0])
K = np.array([0.0, 0.0, 0.0, 1.0])
UNITS = {"H": I, "X": J, "Y": K}

FD_STEP = 1e-5
FD_TOL = 1e-6


def qmul(a, b) -> np.ndarray:
    """Hamilton product, broadcasting over leading axes."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    a1, a2, a3, a4 = np.moveaxis(a, -1, 0)
    b1, b2, b3, b4 = np.moveaxis(b, -1, 0)
    return np.stack([
        a1 * b1 - a2 * b2 - a3 * b3 - a4 * b4,
        a1 * b2 + a2 * b1 + a3 * b4 - a4 * b3,
        a1 * b3 - a2 * b4 + a3 * b1 + a4 * b2,
        a1 * b4 + a2 * b3 - a3 * b2 + a4 * b1,
    ], axis=-1)


def qconj(a) -> np.ndarray:
    return np.asarray(a, dtype=float) * np.array([1.0, -1.0, -1.0, -1.0])


def qnorm2(a) -> np.ndarray:
    return np.sum(np.asarray(a, dtype=float) ** 2, axis=-1)


def qnorm(a) -> np.ndarray:
    return np.sqrt(qnorm2(a))


def qinv(a) -> np.ndarray:
    n2 = qnorm2(a)
    if np.any(n2 == 0):
        raise ZeroInverse("zero quaternion has no inverse")
    return qconj(a) / np.asarray(n2)[..., None]


def as_point(q) -> np.ndarray:
    """Coerce to a ``(d, 4)`` array."""
    q = np.asarray(q, dtype=float)
    if q.ndim == 1:
        if q.size % 4:
            raise DimensionMismatch(f"length {q.size} is not a multiple of 4")
        q = q.reshape(-1, 4)
    if q.ndim != 2 or q.shape[1] != 4:
        raise DimensionMismatch(f"expected a (d, 4) array, got shape {q.shape}")
    return q


# ---------------------------------------------------------------- the form psi_0

def _blocks(*vectors) -> np.ndarray:
    vs = [np.asarray(v, dtype=float) for v in vectors]
    n = vs[0].shape[-1]
    if n % 4 or any(v.shape[-1] != n for v in vs):
        raise DimensionMismatch("tangent vectors must share a length divisible by 4")
    # (..., d, 4 vectors, 4 coordinates)
    return np.stack([v.reshape(v.shape[:-1] + (n // 4, 4)) for v in vs], axis=-2)


def psi0(z, u, v, w) -> np.ndarray:
    """Sum over blocks of dx_{4i-3} ^ dx_{4i-2} ^ dx_{4i-1} ^ dx_{4i} evaluated on (z, u, v, w)."""
    return np.linalg.det(_blocks(z, u, v, w)).sum(axis=-1)


def contract3(u, v, w) -> np.ndarray:
    """The covector z -> psi0(u, v, w, z).

    The inserted vector goes last; this is the ordering under which the
    contraction along (H, X, Y) of the left action is -|q|^2 sum x_i dx_i.
    """
    m = _blocks(u, v, w)  # (..., d, 3, 4)
    out = np.empty(m.shape[:-3] + (m.shape[-3], 4))
    eye = np.eye(4)
    for k in range(4):
        e = np.broadcast_to(eye[k], m.shape[:-2] + (1, 4))
        out[..., k] = np.linalg.det(np.concatenate([m, e], axis=-2))
    return out.reshape(out.shape[:-2] + (-1,))


# ---------------------------------------------------------------- fundamental fields

def fundamental_fields(q, factor: int, side: str = "left") -> tuple[np.ndarray, ...]:
    """(H, X, Y) fields at q of the Sp(1) acting on coordinate ``factor`` (zero based).

    Left: q -> lambda q, with fields u q.  Right: q -> q lambda^-1, with fields -q u.
    """
    q = as_point(q)
    if not 0 <= factor < len(q):
        raise DimensionMismatch(f"factor {factor} out of range for d = {len(q)}")
    out = []
    for u in (I, J, K):
        block = qmul(u, q[factor]) if side == "left" else -qmul(q[factor], u)
        field = np.zeros_like(q)
        field[factor] = block
        out.append(field.ravel())
    return tuple(out)


def oriented_contraction(q, factor: int, side: str = "left") -> np.ndarray:
    """iota_{H^X^Y} psi0 for one factor, with the generator oriented so both sides give -|q|^2 x dx.

    The right fields -q u span the same 3-space as the left ones with the
    opposite orientation, so the right-side generator is taken as -(H^X^Y).
    """
    sign = 1.0 if side == "left" else -1.0
    return sign * contract3(*fundamental_fields(q, factor, side))


def fundamental_field(factor: int, which: str, side: str = "left") -> Callable[[np.ndarray], np.ndarray]:
    """One fundamental field as a callable on flat points."""
    idx = "HXY".index(which)

    def field(x):
        return fundamental_fields(x, factor, side)[idx]
    return field


def sigma_flat(q, C=None) -> np.ndarray:
    """Tri-moment map of the standard Sp(1)^d action: -1/4 |q_l|^4 + C_l."""
    q = as_point(q)
    val = -0.25 * qnorm2(q) ** 2
    if C is None:
        return val
    C = np.asarray(C, dtype=float)
    if C.shape != val.shape:
        raise DimensionMismatch(f"constant of shape {C.shape} for {len(q)} coordinates")
    return val + C


tri_moment_flat = sigma_flat


def grad_sigma_field(factor: int) -> Callable[[np.ndarray], np.ndarray]:
    """Euclidean gradient of sigma_factor, a field supported on one block."""
    def field(x):
        q = as_point(x)
        out = np.zeros_like(q)
        out[factor] = -qnorm2(q[factor]) * q[factor]
        return out.ravel()
    return field


def central_difference(f: Callable, x, v, h: float = FD_STEP):
    x, v = np.asarray(x, dtype=float), np.asarray(v, dtype=float)
    return (f(x + h * v) - f(x - h * v)) / (2 * h)


def check_dsigma_contraction(q, component: int, h: float = FD_STEP, side: str = "left") -> float:
    """Max over coordinate probes of |d sigma_l(v) - iota_{H^X^Y} psi0 (v)|, relative to 1 + |value|."""
    q = as_point(q)
    x0 = q.ravel()
    closed = oriented_contraction(q, component, side)

    def s(x):
        return sigma_flat(x)[component]
    worst = 0.0
    for k in range(x0.size):
        e = np.zeros_like(x0)
        e[k] = 1.0
        fd = central_difference(s, x0, e, h)
        worst = max(worst, abs(fd - closed[k]) / (1 + abs(closed[k])))
    return worst


def bracket_fd(V: Callable, W: Callable, q, h: float = FD_STEP) -> np.ndarray:
    """Finite-difference Lie bracket [V, W] = DW.V - DV.W at q."""
    x = as_point(q).ravel()
    return central_difference(W, x, V(x), h) - central_difference(V, x, W(x), h)


# ---------------------------------------------------------------- horizontality

@dataclass(frozen=True)
class Horizontality:
    residual: float  # over tangent probe triples
    invalid_probes: tuple[int, ...]  # probes with a non-tangent vector
    invalid_values: tuple[float, ...]


def sphere_probes(q, n: int = 0, seed: int = 0) -> np.ndarray:
    """Triples of tangent vectors to the sphere through q in H: the basis triple plus n random ones."""
    q = np.asarray(q, dtype=float)
    basis = np.stack([qmul(u, q) for u in (I, J, K)]) / max(qnorm(q), 1e-300)
    probes = [basis]
    rng = np.random.default_rng(seed)
    for _ in range(n):
        coeffs = rng.standard_normal((3, 3))
        probes.append(coeffs @ basis)
    return np.stack(probes)


def horizontality_residual(c: float, q, beta: str, probes=None, tol: float = 1e-9) -> Horizontality:
    """Evaluate iota_{beta^} psi0 on probe triples at q in {|q|^2 = c} in H.

    A probe with a vector not tangent to the sphere is reported as invalid and
    excluded from the residual.
    """
    q = np.asarray(q, dtype=float).reshape(4)
    if abs(qnorm2(q) - c) > tol * max(1.0, abs(c)):
        raise NotOnSphere(f"|q|^2 = {qnorm2(q):.6g} is not {c}")
    field = fundamental_fields(q, 0, "left")["HXY".index(beta)]
    probes = sphere_probes(q) if probes is None else np.asarray(probes, dtype=float)
    scale = np.sqrt(c)
    good, bad, bad_vals = [], [], []
    for n, (t1, t2, t3) in enumerate(probes):
        value = float(psi0(field, t1, t2, t3))
        radial = max(abs(t @ q) / (scale * max(np.linalg.norm(t), 1e-300)) for t in (t1, t2, t3))
        if radial > tol:
            bad.append(n)
            bad_vals.append(value)
        else:
            good.append(abs(value))
    return Horizontality(max(good, default=0.0), tuple(bad), tuple(bad_vals))


def cut_function(h_value, q) -> np.ndarray:
    """F(m, q) = h(m) - |q|^4 / 4."""
    return np.asarray(h_value, dtype=float) - 0.25 * qnorm2(q) ** 2


# ---------------------------------------------------------------- identity suite

@dataclass(frozen=True)
class IdentityCheck:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)


def contraction_identity_residual(q) -> float:
    """Max over blocks of |iota_{H^X^Y} psi0 + |q_l|^2 sum x dx|."""
    q = as_point(q)
    worst = 0.0
    for l in range(len(q)):
        got = contract3(*fundamental_fields(q, l))
        want = np.zeros_like(q)
        want[l] = -qnorm2(q[l]) * q[l]
        worst = max(worst, float(np.max(np.abs(got - want.ravel()))))
    return worst


def identity_suite(d: int = 2, samples: int = 1000, seed: int = 42,
                   exact_tol: float = 1e-12, fd_tol: float = FD_TOL,
                   step: float = FD_STEP) -> list[IdentityCheck]:
    """Run the flat-model identities on seeded random points of H^d."""
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1.0, 1.0, size=(samples, d, 4))
    contraction = max(contraction_identity_residual(q) for q in pts)
    right = max(float(np.max(np.abs(oriented_contraction(q, l, "right")
                                    - oriented_contraction(q, l, "left"))))
                for q in pts[:100] for l in range(d))
    dsigma = max(check_dsigma_contraction(q, l, step) for q in pts for l in range(d))
    horiz = 0.0
    for q in pts[:100]:
        u = q[0] / qnorm(q[0])
        for beta in "HXY":
            horiz = max(horiz, horizontality_residual(1.0, u, beta,
                                                      sphere_probes(u, 3, seed)).residual)
    checks = [
        IdentityCheck("contraction identity", contraction, exact_tol),
        IdentityCheck("right action contraction", right, exact_tol),
        IdentityCheck("dsigma vs contraction", dsigma, fd_tol),
        IdentityCheck("sphere horizontality", horiz, exact_tol),
    ]
    if d >= 2:
        br = max(float(np.max(np.abs(bracket_fd(grad_sigma_field(a), grad_sigma_field(b), q, step))))
                 for q in pts[:200] for a in range(d) for b in range(d) if a != b)
        checks.append(IdentityCheck("cross-factor gradient brackets", br, fd_tol))
    return checks


def random_unit_quaternions(rng: np.random.Generator, shape: Sequence[int] = ()) -> np.ndarray:
    g = rng.standard_normal(tuple(shape) + (4,))
    return g / np.linalg.norm(g, axis=-1, keepdims=True)
