from fractions import Fraction

import numpy as np
import pytest

from hyperce._exact import abs2, conj, random_gauss_vector, random_rational_vector, real_part
from hyperce.catalog import cyclic_automorphisms, get_group
from hyperce.expectation import (
    ConditionalExpectation,
    HaarIncompatible,
    InvalidWeights,
    NotAGroupOfAutomorphisms,
    NotAnAutomorphism,
    NotASubgroup,
    adjoint_point_measure,
    apply_expectation,
    build_automorphism_orbit,
    build_conjugation,
    build_double_coset,
    build_identity,
    generate_automorphism_group,
    orbit_pushforward,
    verify_expectation_axioms,
    verify_hypergroup_conditions,
    verify_l2_projection,
)
from hyperce.groups import CarrierMismatch, LengthMismatch, point_mass

from conftest import CATALOG, build

F = Fraction


def indicator(n, xs):
    v = np.array([F(0)] * n, dtype=object)
    for x in xs:
        v[x] = F(1)
    return v


def skewed_parity(S3):
    even = [S3.index(x) for x in ("e", "(123)", "(132)")]
    odd = [S3.index(x) for x in ("(12)", "(13)", "(23)")]
    return ConditionalExpectation.create(S3.table, [even, odd], [["1/3"] * 3, ["1/2", "1/4", "1/4"]])


# --- apply_expectation ----------------------------------------------------------

def test_identity_expectation(S3):
    P = build_identity(S3.table)
    f = random_rational_vector(np.random.default_rng(0), 6)
    assert list(apply_expectation(P, f)) == list(f)


def test_whole_group_average(S3):
    P = ConditionalExpectation.uniform(S3.table, [list(range(6))])
    f = random_rational_vector(np.random.default_rng(1), 6)
    assert list(apply_expectation(P, f)) == [sum(f) / 6] * 6


def test_conjugation_on_transposition(S3):
    P = build_conjugation(S3.table)
    out = apply_expectation(P, point_mass(6, S3.index("(12)")))
    expected = {"e": 0, "(12)": F(1, 3), "(13)": F(1, 3), "(23)": F(1, 3), "(123)": 0, "(132)": 0}
    assert {S3.labels[p]: out[p] for p in range(6)} == expected


def test_length_mismatch(S3):
    with pytest.raises(LengthMismatch):
        apply_expectation(build_identity(S3.table), [F(1)] * 5)


# --- construction gates -----------------------------------------------------------

def test_weights_must_sum_to_one(S3):
    with pytest.raises(InvalidWeights):
        ConditionalExpectation.create(S3.table, [list(range(6))], [["3/20"] * 6])  # sums to 9/10


def test_weights_must_be_positive(S3):
    with pytest.raises(InvalidWeights):
        ConditionalExpectation.create(S3.table, [[0, 1], [2, 3, 4, 5]], [["1", "0"], ["1/4"] * 4])


def test_blocks_must_partition(S3):
    with pytest.raises(ValueError):
        ConditionalExpectation.uniform(S3.table, [[0, 1], [1, 2, 3, 4, 5]])
    with pytest.raises(ValueError):
        ConditionalExpectation.uniform(S3.table, [[0, 1], [2, 3, 4]])


# --- builders ---------------------------------------------------------------------

def test_double_coset_trivial_and_full(S3):
    assert build_double_coset(S3.table, [0]).blocks == tuple((p,) for p in range(6))
    full = build_double_coset(S3.table, range(6))
    assert full.blocks == (tuple(range(6)),) and full.weights == ((F(1, 6),) * 6,)


def test_double_coset_s3(S3):
    g = S3.table
    H = [S3.index("e"), S3.index("(12)")]
    P = build_double_coset(g, H)
    # oracle: count h1 p h2 directly for every p
    for p in g.elements:
        tally = {}
        for h1 in H:
            for h2 in H:
                q = g.mul(g.mul(h1, p), h2)
                tally[q] = tally.get(q, 0) + 1
        f_expected = {q: F(k, 4) for q, k in tally.items()}
        block = P.blocks[P.block_of[p]]
        assert set(block) == set(tally)
        assert {q: w for q, w in zip(block, P.weights[P.block_of[p]])} == f_expected
    assert [sorted(S3.labels[p] for p in b) for b in P.blocks] == [
        ["(12)", "e"], ["(123)", "(13)", "(132)", "(23)"]]
    assert P.weights == ((F(1, 2),) * 2, (F(1, 4),) * 4)


def test_double_coset_rejects_non_subgroup(S3):
    with pytest.raises(NotASubgroup):
        build_double_coset(S3.table, [S3.index("e"), S3.index("(123)")])
    with pytest.raises(NotASubgroup):
        build_double_coset(S3.table, [S3.index("(12)")])


def test_conjugation_classes():
    assert build_conjugation(get_group("Z6").table).blocks == tuple((p,) for p in range(6))
    S3 = get_group("S3")
    P = build_conjugation(S3.table)
    assert [sorted(S3.labels[p] for p in b) for b in P.blocks] == [
        ["e"], ["(12)", "(13)", "(23)"], ["(123)", "(132)"]]
    Q8 = build_conjugation(get_group("Q8").table)
    assert sorted(len(b) for b in Q8.blocks) == [1, 1, 2, 2, 2]


def test_automorphism_orbits():
    Z3 = get_group("Z3").table
    assert build_automorphism_orbit(Z3, [[0, 1, 2]]).blocks == ((0,), (1,), (2,))
    assert build_automorphism_orbit(Z3, [[0, 1, 2], [0, 2, 1]]).blocks == ((0,), (1, 2))
    Z5 = get_group("Z5").table
    autos = cyclic_automorphisms(5)
    assert len(autos) == 4
    assert build_automorphism_orbit(Z5, autos).blocks == ((0,), (1, 2, 3, 4))
    assert generate_automorphism_group(Z5, [[0, 2, 4, 1, 3]]) == sorted(autos)


def test_automorphism_errors():
    Z5 = get_group("Z5").table
    with pytest.raises(NotAnAutomorphism):
        build_automorphism_orbit(Z5, [[0, 1, 2, 3, 4], [1, 0, 2, 3, 4]])
    with pytest.raises(NotAGroupOfAutomorphisms):
        build_automorphism_orbit(Z5, [[0, 1, 2, 3, 4], [0, 2, 4, 1, 3]])


# --- adjoint point measures --------------------------------------------------------

def test_adjoint_point_measure_examples(S3):
    P = build_identity(S3.table)
    assert list(adjoint_point_measure(P, 3)) == list(point_mass(6, 3))
    whole = ConditionalExpectation.uniform(S3.table, [list(range(6))])
    assert list(adjoint_point_measure(whole, 0)) == [F(1, 6)] * 6
    C = build_conjugation(S3.table)
    tau = C.block_of[S3.index("(12)")]
    w = adjoint_point_measure(C, tau)
    assert {S3.labels[p]: w[p] for p in range(6) if w[p]} == {"(12)": F(1, 3), "(13)": F(1, 3), "(23)": F(1, 3)}
    with pytest.raises(IndexError):
        adjoint_point_measure(C, 3)


@pytest.mark.parametrize("pair", CATALOG, ids=lambda p: f"{p[0]}-{p[1]}")
def test_pushforward_inverts_adjoint(pair):
    P = build(*pair)
    Q = len(P.blocks)
    for s in range(Q):
        w = adjoint_point_measure(P, s)
        assert list(orbit_pushforward(P, w)) == list(point_mass(Q, s))
        # support is exactly the block
        assert [p for p in range(P.group.order) if w[p] != 0] == sorted(P.blocks[s])


# --- axiom verification ---------------------------------------------------------

@pytest.mark.parametrize("pair", CATALOG, ids=lambda p: f"{p[0]}-{p[1]}")
def test_builders_satisfy_everything(pair):
    P = build(*pair)
    assert verify_expectation_axioms(P, seed=3).passed
    assert verify_hypergroup_conditions(P).passed


def test_identity_axioms_and_report_metadata(S3):
    rep = verify_expectation_axioms(build_identity(S3.table), seed=11)
    assert rep.passed
    assert rep.meta == {"seed": 11, "samples": 64}
    assert set(rep.checks) == {"i_projection_norm_one", "ii_positive", "iii_bimodule", "iv_schwarz", "v_star"}


def test_skewed_parity_fails_comultiplication(S3):
    P = skewed_parity(S3)
    assert verify_expectation_axioms(P).passed
    rep = verify_hypergroup_conditions(P)
    assert not rep["a_comultiplication"].passed
    assert rep["b_involution"].passed
    w = rep["a_comultiplication"].witness
    # recompute the witness independently: (P x P) Delta 1_x at (p, q)
    g = S3.table
    M = P.matrix()
    x, p, q = w["basis"], w["p"], w["q"]
    pxp = sum(M[p, a] * M[q, b] for a in g.elements for b in g.elements if g.mul(a, b) == x)
    Pf = apply_expectation(P, point_mass(6, x))
    side = sum(M[p, a] * Pf[g.mul(a, q)] for a in g.elements) if w["side"] == "P_x_id" else \
        sum(M[q, b] * Pf[g.mul(p, b)] for b in g.elements)
    assert pxp != side
    assert (F(w["P_x_P"]), F(w["lhs"])) == (pxp, side)


def test_conditions_carrier(S3):
    with pytest.raises(CarrierMismatch):
        verify_hypergroup_conditions(build_identity(S3.table), get_group("Z6").table)


# --- properties -------------------------------------------------------------------

@pytest.mark.parametrize("pair", CATALOG[:14], ids=lambda p: f"{p[0]}-{p[1]}")
def test_idempotent_and_schwarz(pair):
    P = build(*pair)
    rng = np.random.default_rng(7)
    n = P.group.order
    for _ in range(16):
        f = random_rational_vector(rng, n)
        pf = apply_expectation(P, f)
        assert list(apply_expectation(P, pf)) == list(pf)
        z = random_gauss_vector(rng, n)
        pz = apply_expectation(P, z)
        pzz = apply_expectation(P, np.array([abs2(v) for v in z], dtype=object))
        for p in range(n):
            assert real_part(pzz[p]) - abs2(pz[p]) >= 0
        assert all(real_part(a) == real_part(conj(b)) for a, b in
                   zip(apply_expectation(P, np.array([conj(v) for v in z], dtype=object)), pz))


# --- L2 projection ----------------------------------------------------------------

@pytest.mark.parametrize("pair", [("S3", "id"), ("S3", "double_coset"), ("S4", "conjugation")],
                         ids=lambda p: f"{p[0]}-{p[1]}")
def test_l2_projection(pair):
    rep = verify_l2_projection(build(*pair))
    assert rep.passed, rep.to_dict()


def test_l2_projection_matrix_by_hand(S3):
    # 6x6 oracle: M[p, q] = w(q) [same block], so M^2 = M and M symmetric for uniform weights
    P = build(*("S3", "double_coset"))
    M = P.matrix()
    assert (M.dot(M) == M).all() and (M == M.T).all()


def test_l2_projection_needs_haar(S3):
    with pytest.raises(HaarIncompatible):
        verify_l2_projection(skewed_parity(S3))
