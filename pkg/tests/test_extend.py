import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import decide, has_pattern_by_orbit
from tables import compact
from qtoric import catalog
from qtoric.errors import NotReduced, ParseError, PatternPresent, Unsupported
from qtoric.extend import (ALL_BASES_CONTAIN_PATTERN, NO_REDUCED_BASIS, ActionTable, BasisMatrix,
                           contains_forbidden_pattern, decide_extendability, generic_stabilizer,
                           homogeneity_rank, is_reduced_basis, synthesize_ghat_action,
                           synthesize_nhat_action, tables_equivalent, torus_stabilizer)
from qtoric.lattice import IntMatrix, KernelLattice, kernel_lattice, projection_from_normals
from qtoric.polytope import HRepPolytope, enumerate_vertices


def kernel_of(P):
    return kernel_lattice(projection_from_normals(P))


def tables_for(P):
    nhat = synthesize_nhat_action(decide_extendability(kernel_of(P)).witness)
    return nhat, synthesize_ghat_action(P, nhat)


def test_reduced_basis_check():
    assert is_reduced_basis(BasisMatrix(((1, 1, 0, 1), (1, 0, 1, 0))))
    assert not is_reduced_basis(BasisMatrix(((1, 1, 1), (1, 0, 1), (1, 1, 0))))
    assert not is_reduced_basis(BasisMatrix(((2, 0), (0, 1))))


def test_pattern_in_square_example():
    A = BasisMatrix(((1, 1, 1, 0), (-1, 1, 0, 1)))
    assert contains_forbidden_pattern(A) == (0, 1, 0, 1)


def test_pattern_absent_in_trapezoid_witness():
    assert contains_forbidden_pattern(BasisMatrix(((1, 1, 0, 1), (1, 0, 1, 0)))) is None


small_matrix = st.integers(2, 4).flatmap(
    lambda k: st.lists(st.lists(st.integers(-1, 1), min_size=k, max_size=k)
                       .filter(lambda r: sum(1 for x in r if x) <= 2), min_size=2, max_size=5))


@given(small_matrix)
def test_pattern_detection_matches_orbit_oracle(rows):
    cols = tuple(zip(*rows))
    assert (contains_forbidden_pattern(BasisMatrix(cols)) is not None) == has_pattern_by_orbit(cols)


@given(small_matrix, st.randoms(use_true_random=False))
def test_pattern_invariant_under_symmetries(rows, rnd):
    cols = [list(c) for c in zip(*rows)]
    before = contains_forbidden_pattern(BasisMatrix(tuple(map(tuple, cols)))) is not None
    j = rnd.randrange(len(cols))
    cols[j] = [-x for x in cols[j]]
    rnd.shuffle(cols)
    perm = list(range(len(rows)))
    rnd.shuffle(perm)
    cols = [[c[p] for p in perm] for c in cols]
    assert (contains_forbidden_pattern(BasisMatrix(tuple(map(tuple, cols)))) is not None) == before


@pytest.mark.parametrize("name", ["delta1", "delta2", "delta3", "delta4", "cube1", "cube2", "cube3",
                                  "trapezoid", "ex"])
def test_extendable_catalog(name):
    D = decide_extendability(kernel_of(catalog.load(name)))
    assert D.extendable
    assert is_reduced_basis(D.witness)
    assert contains_forbidden_pattern(D.witness) is None


def test_trapezoid_witness(trapezoid):
    D = decide_extendability(kernel_of(trapezoid))
    assert D.witness.columns == ((1, 1, 0, 1), (1, 0, 1, 0))


def test_square_kernel_always_has_pattern(square):
    D = decide_extendability(kernel_of(square))
    assert not D.extendable
    assert D.reason == ALL_BASES_CONTAIN_PATTERN


@pytest.mark.parametrize("l", [2, 3])
def test_nonfunz_lattice_has_no_reduced_basis(l):
    D = decide_extendability(KernelLattice.from_basis([(1, 0, 1, 0), (1, l, 0, 1)]))
    assert not D.extendable
    assert D.reason == NO_REDUCED_BASIS
    assert D.reduced_bases == 0


def test_nonfunz_geometric_trapezoids():
    assert decide_extendability(kernel_of(catalog.load("nonfunz_l2"))).reason == ALL_BASES_CONTAIN_PATTERN
    assert decide_extendability(kernel_of(catalog.load("nonfunz_l3"))).reason == NO_REDUCED_BASIS


def test_trivial_kernel():
    D = decide_extendability(KernelLattice(3, ()))
    assert D.extendable and D.witness.k == 0


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


def test_agrees_with_brute_force_oracle():
    for pi in random_kernels(60, 99):
        d = pi.shape[1]
        K = kernel_lattice(IntMatrix(tuple(map(tuple, pi.tolist()))))
        D = decide_extendability(K)
        ext, any_reduced = decide(pi.tolist(), d)
        assert D.extendable == ext
        if not ext:
            assert (D.reason == NO_REDUCED_BASIS) == (not any_reduced)


@given(st.permutations(range(6)))
def test_decision_stable_under_facet_order(perm):
    P = catalog.load("ex")
    Q = HRepPolytope.from_data([P.normals[i] for i in perm], [P.offsets[i] for i in perm])
    D = decide_extendability(kernel_of(Q))
    assert D.extendable
    assert sum(1 for c in D.witness.columns for x in c if x) == 8


def test_decision_independent_of_basis_choice(trapezoid):
    K = kernel_of(trapezoid)
    b1, b2 = K.basis
    other = KernelLattice.from_basis([tuple(-x for x in b1), tuple(x + 3 * y for x, y in zip(b2, b1))])
    assert decide_extendability(other) == decide_extendability(K)


# ------------------------------------------------------------------ action tables

REFERENCE_NHAT = {
    "trapezoid": "(h1q1h2^-1, q2h2^-1, h1q3, q4h2^-1)",
    "ex": "(h1q1h3^-1, q2h2^-1, h1q3, q4h3^-1, h2q5h3^-1, q6h2^-1)",
    "cube2": "(h1q1, h2q2, h1q3, h2q4)",
}
REFERENCE_GHAT = {
    "trapezoid": "(h1q1h2^-1, g1q2h2^-1, h1q3g2^-1, q4h2^-1)",
    "ex": "(h1q1h3^-1, g1q2h2^-1, h1q3g2^-1, g3q4h3^-1, h2q5h3^-1, q6h2^-1)",
    "cube2": "(h1q1g1^-1, h2q2g2^-1, h1q3, h2q4)",
}


@pytest.mark.parametrize("name", sorted(REFERENCE_NHAT))
def test_tables_match_reference_displays(name):
    nhat, ghat = tables_for(catalog.load(name))
    assert tables_equivalent(nhat, compact(REFERENCE_NHAT[name]))
    assert tables_equivalent(ghat, compact(REFERENCE_GHAT[name]))


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_simplex_tables(m):
    nhat, ghat = tables_for(catalog.simplex(m))
    assert nhat.display() == "(" + ", ".join(f"h1q{i}" for i in range(1, m + 2)) + ")"
    expected = [f"h1q{i}g{i}^-1" for i in range(1, m + 1)] + [f"h1q{m + 1}"]
    assert tables_equivalent(ghat, compact("(" + ", ".join(expected) + ")"))


@pytest.mark.parametrize("m", [1, 2, 3])
def test_cube_ghat(m):
    _, ghat = tables_for(catalog.cube(m))
    expected = ([f"h{i}q{i}g{i}^-1" for i in range(1, m + 1)]
                + [f"h{i}q{m + i}" for i in range(1, m + 1)])
    assert tables_equivalent(ghat, compact("(" + ", ".join(expected) + ")"))


def test_trapezoid_ghat_exact(trapezoid):
    assert tables_for(trapezoid)[1].display() == "(h1q1h2^-1, h1q2g1^-1, g2q3h2^-1, h1q4)"


def test_nhat_rejects_bad_bases():
    with pytest.raises(NotReduced):
        synthesize_nhat_action(BasisMatrix(((1, 1, 1), (1, 0, 1), (1, 1, 0))))
    with pytest.raises(PatternPresent):
        synthesize_nhat_action(BasisMatrix(((1, 1, 1, 0), (-1, 1, 0, 1))))


def test_ghat_unsupported_when_no_free_side():
    nhat = compact("(h1q1h2^-1, h2q2h1^-1)")
    P = HRepPolytope.from_data([(-1,), (1,)], [0, 1])
    with pytest.raises(Unsupported):
        synthesize_ghat_action(P, nhat)


def test_equivalence_rejects_different_structure():
    a = compact("(h1q1h2^-1, h1q2)")
    assert tables_equivalent(a, compact("(h2q1h1^-1, q2h1^-1)"))
    assert not tables_equivalent(a, compact("(h1q1, h2q2)"))
    assert not tables_equivalent(a, compact("(h1q1h2^-1, h1q2, q3)"))


@pytest.mark.parametrize("name", ["trapezoid", "ex", "cube3", "delta4"])
def test_table_format_round_trip(name):
    _, ghat = tables_for(catalog.load(name))
    assert ActionTable.parse(ghat.format()) == ghat


@pytest.mark.parametrize("bad", ["q1 <- h1 * q2", "q1 <- x1 * q1", "q1 <- h1 * q1 * h1^-1",
                                 "q2 <- h1 * q2"])
def test_table_parse_errors(bad):
    with pytest.raises(ParseError):
        ActionTable.parse(bad)


def test_action_is_a_group_action(trapezoid):
    from qtoric.quatgeom import qmul, random_unit_quaternions
    _, ghat = tables_for(trapezoid)
    rng = np.random.default_rng(3)
    q = rng.normal(size=(4, 4))
    fs = ghat.factors()
    a = dict(zip(fs, random_unit_quaternions(rng, (len(fs),))))
    b = dict(zip(fs, random_unit_quaternions(rng, (len(fs),))))
    ab = {f: qmul(a[f], b[f]) for f in fs}
    assert np.allclose(ghat.act(ab, q), ghat.act(a, ghat.act(b, q)), atol=1e-13)
    assert np.allclose(np.linalg.norm(ghat.act(a, q), axis=1), np.linalg.norm(q, axis=1))


# ------------------------------------------------------------------ stabilizers

@pytest.mark.parametrize("name", ["delta1", "delta2", "delta3", "delta4", "cube1", "cube2", "cube3",
                                  "trapezoid", "ex"])
def test_nhat_free_at_every_vertex(name):
    P = catalog.load(name)
    nhat, _ = tables_for(P)
    for v in enumerate_vertices(P):
        rep = generic_stabilizer(nhat, v.active_set)
        assert rep.free, (v.point, rep)
        assert torus_stabilizer(kernel_of(P), v.active_set).trivial


def test_negative_control_reports_minus_one():
    rep = generic_stabilizer(compact("(h1q1h2^-1, h2q2h1^-1)"), [])
    assert not rep.free
    assert rep.unanchored_components == 1
    assert [str(f) for f in rep.central_elements[0]] == ["h1", "h2"]


def test_idle_factor_counts_as_unanchored():
    rep = generic_stabilizer(compact("(h1q1, h2q2)"), [1])
    assert not rep.free
    assert [str(f) for f in rep.idle] == ["h2"]


def test_ghat_free_generically(ex):
    _, ghat = tables_for(ex)
    assert generic_stabilizer(ghat, []).free


def test_torus_stabilizer_torsion():
    rep = torus_stabilizer(KernelLattice.from_basis([(2, 0), (0, 1)]), [])
    assert rep.divisors == (1, 2)
    assert not rep.trivial


def test_torus_stabilizer_square_vertex(square):
    # the non-smooth vertex (1,2) has a Z/2 stabilizer
    rep = torus_stabilizer(kernel_of(square), [2, 3])
    assert 2 in rep.divisors


@pytest.mark.parametrize("m", range(1, 6))
def test_homogeneity_rank_vanishes(m):
    assert homogeneity_rank(m, 0, 4 * m, 3 * m, 0) == 0


def test_homogeneity_rank_is_plain_arithmetic():
    assert homogeneity_rank(2, 2, 8, 6, 3) == 2 - 2 - 8 + 6 - 3
    assert homogeneity_rank(0, 0, 0, 0, 0) == 0


def test_reduced_basis_count_symmetric(trapezoid):
    # every reduced basis of T is found regardless of column signs
    D = decide_extendability(kernel_of(trapezoid))
    assert D.short_vectors == 3
    assert D.reduced_bases == len(list(itertools.combinations(range(3), 2)))
