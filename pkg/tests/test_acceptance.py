"""One test per acceptance criterion; each prints a PASS/FAIL line at the end of the run."""

import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from oracles import decide
from tables import compact
from qtoric import catalog
from qtoric.cut import (CutSpec, cut_chain, cut_level_set_decomposition, cut_moment_consistency,
                        hp2_first_component_samples, polytope_cut)
from qtoric.extend import (ALL_BASES_CONTAIN_PATTERN, NO_REDUCED_BASIS, decide_extendability,
                           generic_stabilizer, homogeneity_rank, synthesize_ghat_action,
                           synthesize_nhat_action, tables_equivalent)
from qtoric.lattice import (IntMatrix, KernelLattice, kernel_lattice, projection_from_normals,
                            same_lattice, smith_normal_form)
from qtoric.momentgeo import (BlowupHP2, HPm, ProductHP1, euler_characteristic, fixed_point_images,
                              hausdorff_to_polytope, hull_membership_many, model_moment,
                              sample_level_set, sample_model)
from qtoric.polytope import enumerate_vertices, verify_delzant
from qtoric.quatgeom import (bracket_fd, check_dsigma_contraction, contraction_identity_residual,
                             grad_sigma_field, horizontality_residual, qnorm2,
                             random_unit_quaternions, sphere_probes)


def record(n, title, checks):
    """checks: list of (label, ok); prints and stores a single summary line."""
    ok = all(c for _, c in checks)
    failed = [label for label, c in checks if not c]
    line = f"criterion {n} ({title}): {'PASS' if ok else 'FAIL'}"
    if failed:
        line += "  failed: " + "; ".join(failed)
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def kernel_of(P):
    return kernel_lattice(projection_from_normals(P))


def test_criterion_1_delzant():
    names = [f"delta{m}" for m in range(1, 5)] + [f"cube{m}" for m in range(1, 4)] + ["trapezoid", "ex"]
    checks = [(name, verify_delzant(catalog.load(name)).is_delzant) for name in names]
    square = verify_delzant(catalog.load("square_counterexample"))
    dets = [abs(c.determinant) for c in square.failures]
    checks.append(("square fails", not square.is_delzant))
    checks.append(("square witness det 2", dets == [2]))
    record(1, "Delzant verification", checks)


def test_criterion_2_kernel():
    checks = []
    for name in catalog.polytope_names():
        pi = projection_from_normals(catalog.load(name))
        K = kernel_lattice(pi)
        checks.append((f"{name} pi.b = 0", all(not any(pi.apply(b)) for b in K.basis)))
        checks.append((f"{name} divisors", all(x == 1 for x in smith_normal_form(pi).divisors)))
    K = kernel_of(catalog.load("trapezoid"))
    checks.append(("trapezoid lattice", same_lattice(K.basis, [(1, 0, 1, 0), (1, 1, 0, 1)])))
    record(2, "kernel correctness", checks)


def random_kernels(n, seed):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        d = int(rng.integers(3, 9))
        m = int(rng.integers(max(1, d - 4), d))
        pi = rng.integers(-1, 2, size=(m, d))
        if np.linalg.matrix_rank(pi) == m:
            out.append(pi)
    return out


def test_criterion_3_extendability():
    checks = []
    for name in ["delta1", "delta2", "delta3", "delta4", "trapezoid", "ex"]:
        checks.append((f"{name} yes", decide_extendability(kernel_of(catalog.load(name))).extendable))
    sq = decide_extendability(kernel_of(catalog.load("square_counterexample")))
    checks.append(("square no (pattern)", not sq.extendable and sq.reason == ALL_BASES_CONTAIN_PATTERN))
    for l in (2, 3):
        D = decide_extendability(KernelLattice.from_basis([(1, 0, 1, 0), (1, l, 0, 1)]))
        checks.append((f"nonfunz l={l} no reduced basis", not D.extendable and D.reason == NO_REDUCED_BASIS))
    agree = 0
    kernels = random_kernels(200, 2024)
    for pi in kernels:
        D = decide_extendability(kernel_lattice(IntMatrix(tuple(map(tuple, pi.tolist())))))
        ext, any_reduced = decide(pi.tolist(), pi.shape[1])
        reason_ok = ext or (D.reason == NO_REDUCED_BASIS) == (not any_reduced)
        agree += int(D.extendable == ext and reason_ok)
    checks.append((f"oracle agreement {agree}/{len(kernels)}", agree == len(kernels)))
    record(3, "extendability decisions", checks)


REFERENCE = {
    "trapezoid": ("(h1q1h2^-1, q2h2^-1, h1q3, q4h2^-1)",
                  "(h1q1h2^-1, g1q2h2^-1, h1q3g2^-1, q4h2^-1)"),
    "ex": ("(h1q1h3^-1, q2h2^-1, h1q3, q4h3^-1, h2q5h3^-1, q6h2^-1)",
           "(h1q1h3^-1, g1q2h2^-1, h1q3g2^-1, g3q4h3^-1, h2q5h3^-1, q6h2^-1)"),
}


def simplex_reference(m):
    nhat = "(" + ", ".join(f"h1q{i}" for i in range(1, m + 2)) + ")"
    ghat = "(" + ", ".join([f"h1q{i}g{i}^-1" for i in range(1, m + 1)] + [f"h1q{m + 1}"]) + ")"
    return nhat, ghat


def cube_reference(m):
    nhat = "(" + ", ".join([f"h{i}q{i}" for i in range(1, m + 1)]
                           + [f"h{i}q{m + i}" for i in range(1, m + 1)]) + ")"
    ghat = "(" + ", ".join([f"h{i}q{i}g{i}^-1" for i in range(1, m + 1)]
                           + [f"h{i}q{m + i}" for i in range(1, m + 1)]) + ")"
    return nhat, ghat


def test_criterion_4_action_tables():
    cases = dict(REFERENCE)
    cases.update({f"delta{m}": simplex_reference(m) for m in range(1, 5)})
    cases.update({f"cube{m}": cube_reference(m) for m in range(1, 4)})
    checks = []
    for name, (ref_n, ref_g) in cases.items():
        P = catalog.load(name)
        nhat = synthesize_nhat_action(decide_extendability(kernel_of(P)).witness)
        ghat = synthesize_ghat_action(P, nhat)
        checks.append((f"{name} N-hat", tables_equivalent(nhat, compact(ref_n))))
        checks.append((f"{name} G-hat", tables_equivalent(ghat, compact(ref_g))))
        free = all(generic_stabilizer(nhat, v.active_set).free for v in enumerate_vertices(P))
        checks.append((f"{name} free at vertices", free))
    neg = generic_stabilizer(compact("(h1q1h2^-1, h2q2h1^-1)"), [])
    minus_one = [tuple(str(f) for f in c) for c in neg.central_elements] == [("h1", "h2")]
    checks.append(("negative control reports (-1, -1)", not neg.free and minus_one))
    record(4, "action tables and freeness", checks)


def test_criterion_5_differential_identities():
    rng = np.random.default_rng(42)
    checks = []
    pts = rng.uniform(-1, 1, size=(1000, 3, 4))
    contraction = max(contraction_identity_residual(q) for q in pts)
    checks.append((f"contraction {contraction:.1e}", contraction <= 1e-12))
    for d in range(1, 5):
        pts = rng.uniform(-1, 1, size=(1000, d, 4))
        worst = max(check_dsigma_contraction(q, l, 1e-5) for q in pts for l in range(d))
        checks.append((f"dsigma d={d} {worst:.1e}", worst <= 1e-6))
    horiz = 0.0
    for u in random_unit_quaternions(rng, (200,)):
        for beta in "HXY":
            horiz = max(horiz, horizontality_residual(1.0, u, beta, sphere_probes(u, 3, 1)).residual)
    checks.append((f"horizontality {horiz:.1e}", horiz <= 1e-12))
    br = 0.0
    for q in rng.uniform(-1, 1, size=(200, 4, 4)):
        for a in range(4):
            for b in range(4):
                if a != b:
                    br = max(br, float(np.max(np.abs(bracket_fd(grad_sigma_field(a),
                                                                grad_sigma_field(b), q, 1e-5)))))
    checks.append((f"brackets {br:.1e}", br <= 1e-6))
    record(5, "differential identities", checks)


def test_criterion_6_level_sets_and_images():
    checks = []
    T = catalog.load("trapezoid")
    S = sample_level_set(T, kernel_of(T), 10_000)
    n4 = qnorm2(S.points) ** 2
    eq = max(np.max(np.abs(n4[:, 0] + n4[:, 2] - 4)), np.max(np.abs(n4[:, 0] + n4[:, 1] + n4[:, 3] - 8)))
    checks.append((f"level set {eq:.1e}", eq <= 1e-9))
    rt = float(np.max(np.abs(S.projections - S.sources)))
    checks.append((f"round trip {rt:.1e}", rt <= 1e-8))
    for label, M in [("HP2", HPm(2)), ("HP1xHP1", ProductHP1(2)), ("blowup", BlowupHP2(0.5, 0.5, 0.5))]:
        imgs = np.array([model_moment(M, p) for p in sample_model(M, 10_000)])
        inside = sum(c.inside for c in hull_membership_many(fixed_point_images(M), imgs, 1e-7))
        checks.append((f"{label} {inside}/10000 in hull", inside == 10_000))
    hd = hausdorff_to_polytope(S.projections, T)
    checks.append((f"Hausdorff {hd:.3f}", hd <= 0.05))
    record(6, "level sets and images", checks)


def test_criterion_7_cuts():
    checks = []
    D2 = catalog.load("delta2_scaled")
    res = polytope_cut(D2, CutSpec(1, 1))
    checks.append(("cut gives T", res.polytope.facet_set() == catalog.load("trapezoid").facet_set()))
    for m in range(1, 4):
        Q = cut_chain(catalog.simplex(m, m + 1), [CutSpec(i, 1) for i in range(m)])
        checks.append((f"cube{m}", Q.facet_set() == catalog.cube(m).facet_set()))
    cons = cut_moment_consistency(D2, res, n=1000)
    checks.append((f"moment consistency {cons.residual:.1e}", cons.residual <= 1e-9))
    rep = cut_level_set_decomposition(hp2_first_component_samples(1000, -0.5), -0.5)
    checks.append((f"|q|^2 = 2 sqrt(h - eps) {rep.relation_residual:.1e}",
                   rep.relation_residual <= 1e-9 and rep.upper + rep.boundary + rep.excluded == 1000))
    record(7, "cut correspondence", checks)


def test_criterion_8_counting():
    checks = [(f"chi(delta{m})", euler_characteristic(catalog.simplex(m)) == m + 1) for m in range(1, 5)]
    checks.append(("chi(T)", euler_characteristic(catalog.load("trapezoid")) == 4))
    checks += [(f"chi(cube{m})", euler_characteristic(catalog.cube(m)) == 2 ** m) for m in range(1, 4)]
    checks += [(f"homogeneity m={m}", homogeneity_rank(m, 0, 4 * m, 3 * m, 0) == 0) for m in range(1, 6)]
    record(8, "counting", checks)
