"""Conditional expectations onto block-constant subalgebras of C(G).

On a finite group every expectation onto a subalgebra of C(G) averages over
the blocks of a partition against a probability vector on each block:

    (Pf)(p) = sum_{q in block(p)} w(q) f(q).

Here ``w`` restricted to a block O_s is the measure P*(eps_s).  Weights are
required to be strictly positive so that supp P*(eps_s) = O_s holds by
construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._exact import (
    abs2,
    conj,
    exact_equal,
    frac,
    frac_str,
    random_gauss_vector,
    real_part,
    scale_to_int,
)
from .groups import CarrierMismatch, GroupTable, LengthMismatch, pushforward
from .report import Check, Report

SAMPLES = 64


class ExpectationError(ValueError):
    pass


class InvalidWeights(ExpectationError):
    pass


class NotASubgroup(ExpectationError):
    pass


class NotAnAutomorphism(ExpectationError):
    pass


class NotAGroupOfAutomorphisms(ExpectationError):
    pass


class HaarIncompatible(ExpectationError):
    pass


@dataclass(frozen=True, eq=False)
class BlockSystem:
    group: GroupTable
    blocks: tuple[tuple[int, ...], ...]
    block_of: tuple[int, ...]

    @classmethod
    def from_blocks(cls, group: GroupTable, blocks: Sequence[Sequence[int]]) -> "BlockSystem":
        blocks = tuple(tuple(int(p) for p in b) for b in blocks)
        block_of = [-1] * group.order
        for s, b in enumerate(blocks):
            if not b:
                raise ExpectationError(f"block {s} is empty")
            for p in b:
                if not 0 <= p < group.order:
                    raise ExpectationError(f"block {s} contains out-of-range element {p}")
                if block_of[p] >= 0:
                    raise ExpectationError(f"element {p} lies in blocks {block_of[p]} and {s}")
                block_of[p] = s
        missing = [p for p, b in enumerate(block_of) if b < 0]
        if missing:
            raise ExpectationError(f"elements {missing} are not covered by any block")
        return cls(group, blocks, tuple(block_of))

    def __len__(self) -> int:
        return len(self.blocks)


@dataclass(frozen=True, eq=False)
class ConditionalExpectation:
    block_system: BlockSystem
    weights: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        bs = self.block_system
        if len(self.weights) != len(bs.blocks):
            raise InvalidWeights(f"{len(self.weights)} weight vectors for {len(bs.blocks)} blocks")
        for s, (b, w) in enumerate(zip(bs.blocks, self.weights)):
            if len(b) != len(w):
                raise InvalidWeights(f"block {s} has {len(b)} elements but {len(w)} weights")
            if any(x <= 0 for x in w):
                raise InvalidWeights(f"block {s} has a non-positive weight")
            if sum(w) != 1:
                raise InvalidWeights(f"weights of block {s} sum to {sum(w)}, not 1")

    @classmethod
    def create(cls, group: GroupTable, blocks, weights) -> "ConditionalExpectation":
        bs = BlockSystem.from_blocks(group, blocks)
        return cls(bs, tuple(tuple(frac(x) for x in w) for w in weights))

    @classmethod
    def uniform(cls, group: GroupTable, blocks) -> "ConditionalExpectation":
        return cls.create(group, blocks, [[Fraction(1, len(b))] * len(b) for b in blocks])

    @property
    def group(self) -> GroupTable:
        return self.block_system.group

    @property
    def blocks(self):
        return self.block_system.blocks

    @property
    def block_of(self):
        return self.block_system.block_of

    def weight_vector(self) -> np.ndarray:
        """w as a vector over G: w[q] = weight of q inside its own block."""
        w = np.empty(self.group.order, dtype=object)
        for b, ws in zip(self.blocks, self.weights):
            for p, x in zip(b, ws):
                w[p] = x
        return w

    def matrix(self) -> np.ndarray:
        """Matrix M of P in the standard basis: (Pf)[p] = sum_q M[p, q] f[q]."""
        n = self.group.order
        w = self.weight_vector()
        m = np.array([[Fraction(0)] * n for _ in range(n)], dtype=object)
        for b in self.blocks:
            for p in b:
                for q in b:
                    m[p, q] = w[q]
        return m

    def to_json(self) -> dict:
        return {
            "blocks": [list(b) for b in self.blocks],
            "weights": [[frac_str(x) for x in w] for w in self.weights],
        }

    @classmethod
    def from_json(cls, group: GroupTable, doc: dict) -> "ConditionalExpectation":
        return cls.create(group, doc["blocks"], doc["weights"])


def apply_expectation(P: ConditionalExpectation, f) -> np.ndarray:
    if len(f) != P.group.order:
        raise LengthMismatch(f"function of length {len(f)} on a group of order {P.group.order}")
    out = np.empty(len(f), dtype=object)
    for b, ws in zip(P.blocks, P.weights):
        avg = sum((w * f[q] for q, w in zip(b, ws)), start=0 * f[b[0]])
        for p in b:
            out[p] = avg
    return out


def adjoint_point_measure(P: ConditionalExpectation, s: int) -> np.ndarray:
    """P*(eps_s): the block weights of O_s spread over G."""
    if not 0 <= s < len(P.blocks):
        raise IndexError(f"block index {s} out of range 0..{len(P.blocks) - 1}")
    out = np.array([Fraction(0)] * P.group.order, dtype=object)
    for p, w in zip(P.blocks[s], P.weights[s]):
        out[p] = w
    return out


def orbit_pushforward(P: ConditionalExpectation, mu) -> np.ndarray:
    """phi_* mu for the quotient map phi: G -> Q sending p to its block."""
    return pushforward(mu, P.block_of, len(P.blocks))


# --- builders -----------------------------------------------------------------

def build_identity(g: GroupTable) -> ConditionalExpectation:
    return ConditionalExpectation.uniform(g, [[p] for p in g.elements])


def _sorted_blocks(blocks):
    return sorted((sorted(b) for b in blocks), key=lambda b: b[0])


def build_double_coset(g: GroupTable, subgroup: Sequence[int]) -> ConditionalExpectation:
    """Averaging over two-sided translates: Pf(p) = |H|^-2 sum_{h1,h2} f(h1 p h2)."""
    H = sorted(set(int(h) for h in subgroup))
    if not H or any(not 0 <= h < g.order for h in H):
        raise NotASubgroup("subgroup must be a nonempty set of element indices")
    Hs = set(H)
    if g.identity not in Hs:
        raise NotASubgroup("subgroup does not contain the identity")
    for a in H:
        if g.inv(a) not in Hs:
            raise NotASubgroup(f"subgroup is not closed under inverse at {a}")
        for b in H:
            if g.mul(a, b) not in Hs:
                raise NotASubgroup(f"subgroup is not closed: {a}*{b} = {g.mul(a, b)}")

    counts: dict[int, dict[int, int]] = {}
    seen: set[int] = set()
    for p in g.elements:
        if p in seen:
            continue
        tally: dict[int, int] = {}
        for h1 in H:
            for h2 in H:
                q = g.mul(g.mul(h1, p), h2)
                tally[q] = tally.get(q, 0) + 1
        seen.update(tally)
        counts[min(tally)] = tally
    blocks = _sorted_blocks(counts.values())
    weights = [[Fraction(counts[b[0]][q], len(H) ** 2) for q in b] for b in blocks]
    return ConditionalExpectation.create(g, blocks, weights)


def _orbit_expectation(g: GroupTable, perms: Sequence[Sequence[int]]) -> ConditionalExpectation:
    """Uniform orbit averaging Pf(p) = |B|^-1 sum_sigma f(sigma p) for a permutation group B."""
    seen: set[int] = set()
    blocks = []
    for p in g.elements:
        if p in seen:
            continue
        orb = {int(s[p]) for s in perms}
        seen.update(orb)
        blocks.append(orb)
    # orbit averaging over a group puts |B|/|orbit| mass on each orbit point, i.e. uniform
    return ConditionalExpectation.uniform(g, _sorted_blocks(blocks))


def build_conjugation(g: GroupTable) -> ConditionalExpectation:
    """Pf(p) = |G|^-1 sum_h f(h p h^-1); blocks are conjugacy classes."""
    perms = [[g.mul(g.mul(h, p), g.inv(h)) for p in g.elements] for h in g.elements]
    return _orbit_expectation(g, perms)


def build_automorphism_orbit(g: GroupTable, autos: Sequence[Sequence[int]]) -> ConditionalExpectation:
    perms = []
    for i, a in enumerate(autos):
        a = [int(x) for x in a]
        if sorted(a) != list(g.elements):
            raise NotAnAutomorphism(f"map {i} is not a permutation of the group elements")
        for p in g.elements:
            for q in g.elements:
                if a[g.mul(p, q)] != g.mul(a[p], a[q]):
                    raise NotAnAutomorphism(
                        f"map {i} is not multiplicative at ({p}, {q})"
                    )
        perms.append(tuple(a))
    pset = set(perms)
    if not pset:
        raise NotAGroupOfAutomorphisms("empty automorphism list")
    for a in pset:
        inv = [0] * g.order
        for p, x in enumerate(a):
            inv[x] = p
        if tuple(inv) not in pset:
            raise NotAGroupOfAutomorphisms(f"inverse of {list(a)} is missing")
        for b in pset:
            if tuple(a[b[p]] for p in g.elements) not in pset:
                raise NotAGroupOfAutomorphisms(f"composition of {list(a)} and {list(b)} is missing")
    return _orbit_expectation(g, sorted(pset))


def generate_automorphism_group(g: GroupTable, generators: Sequence[Sequence[int]]) -> list[list[int]]:
    """Close a set of permutations under composition (finite, so inverses come free)."""
    ident = tuple(g.elements)
    gens = [tuple(int(x) for x in a) for a in generators]
    out = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for a in frontier:
            for b in gens:
                c = tuple(b[a[p]] for p in g.elements)
                if c not in out:
                    out.add(c)
                    nxt.append(c)
        frontier = nxt
    return [list(a) for a in sorted(out)]


# --- verification ---------------------------------------------------------------

def _basis(n: int):
    for x in range(n):
        e = np.array([Fraction(0)] * n, dtype=object)
        e[x] = Fraction(1)
        yield x, e


def _block_indicators(P: ConditionalExpectation):
    n = P.group.order
    for s, b in enumerate(P.blocks):
        v = np.array([Fraction(0)] * n, dtype=object)
        for p in b:
            v[p] = Fraction(1)
        yield s, v


def verify_expectation_axioms(P: ConditionalExpectation, seed: int = 0) -> Report:
    """Check the five conditional-expectation axioms.

    Linear statements are checked on every basis indicator; the nonlinear
    inequalities on ``SAMPLES`` random complex rational functions.
    """
    n = P.group.order
    rng = np.random.default_rng(seed)
    samples = [random_gauss_vector(rng, n) for _ in range(SAMPLES)]
    Pf = [apply_expectation(P, f) for f in samples]

    checks: dict[str, Check] = {}

    # (i) projection of norm one
    witness = None
    for x, e in _basis(n):
        pe = apply_expectation(P, e)
        if not all(exact_equal(a, b) for a, b in zip(apply_expectation(P, pe), pe)):
            witness = {"basis": x}
            break
    if witness is None:
        for k, (f, pf) in enumerate(zip(samples, Pf)):
            if max(abs2(z) for z in pf) > max(abs2(z) for z in f):
                witness = {"sample": k, "reason": "sup-norm increased"}
                break
    checks["i_projection_norm_one"] = Check(witness is None, witness)

    # (ii) positivity of P(|f|^2)
    witness = None
    for k, f in enumerate(samples):
        pf = apply_expectation(P, np.array([abs2(z) for z in f], dtype=object))
        bad = [p for p, v in enumerate(pf) if real_part(v) < 0]
        if bad:
            witness = {"sample": k, "point": bad[0]}
            break
    checks["ii_positive"] = Check(witness is None, witness)

    # (iii) bimodule property on block indicators and basis functions
    witness = None
    inds = list(_block_indicators(P))
    for x, e in _basis(n):
        pe = apply_expectation(P, e)
        for s, b in inds:
            for t, b2 in inds:
                lhs = apply_expectation(P, b * e * b2)
                if not all(exact_equal(u, v) for u, v in zip(lhs, b * pe * b2)):
                    witness = {"basis": x, "left_block": s, "right_block": t}
                    break
            if witness:
                break
        if witness:
            break
    checks["iii_bimodule"] = Check(witness is None, witness)

    # (iv) Schwarz inequality P(f)^* P(f) <= P(f^* f), pointwise
    witness = None
    for k, (f, pf) in enumerate(zip(samples, Pf)):
        pff = apply_expectation(P, np.array([abs2(z) for z in f], dtype=object))
        bad = [p for p in range(n) if abs2(pf[p]) > real_part(pff[p])]
        if bad:
            witness = {"sample": k, "point": bad[0]}
            break
    checks["iv_schwarz"] = Check(witness is None, witness)

    # (v) P(f^*) = P(f)^*
    witness = None
    for k, (f, pf) in enumerate(zip(samples, Pf)):
        lhs = apply_expectation(P, np.array([conj(z) for z in f], dtype=object))
        if not all(exact_equal(a, conj(b)) for a, b in zip(lhs, pf)):
            witness = {"sample": k}
            break
    checks["v_star"] = Check(witness is None, witness)

    return Report("expectation_axioms", checks, {"seed": seed, "samples": SAMPLES})


def _comult_tables(P: ConditionalExpectation):
    """Scaled-integer tensors for the three sides of the coassociativity condition.

    Returns (A1, A2, A3), each indexed [x, p, q] for the basis indicator 1_x:
      A1 = (P x id) Delta P 1_x,  A2 = (id x P) Delta P 1_x,  A3 = (P x P) Delta 1_x
    all scaled by D^2 so they compare exactly as integers.
    """
    g = P.group
    M, D = scale_to_int(P.matrix())
    n = g.order
    # (Delta P 1_x)(p, q) = M[pq, x]
    dP = np.transpose(M[g.mult, :], (2, 0, 1))  # [x, p, q], scaled by D
    A1 = np.einsum("ap,xpq->xaq", M, dP)  # P acting on the first slot
    A2 = np.einsum("xpb,qb->xpq", dP, M)  # P acting on the second slot
    # (Delta 1_x)(p, q) = [pq == x]
    delta = np.zeros((n, n, n), dtype=M.dtype)
    for p in range(n):
        for q in range(n):
            delta[g.mult[p, q], p, q] = 1
    A3 = np.einsum("ap,xpq,bq->xab", M, delta, M)
    return A1, A2, A3, D


def verify_hypergroup_conditions(P: ConditionalExpectation, g: GroupTable | None = None) -> Report:
    """Check the coassociativity, involution and Haar conditions on P exactly."""
    if g is None:
        g = P.group
    if g != P.group:
        raise CarrierMismatch("expectation is defined on a different group")
    n = g.order
    A1, A2, A3, D = _comult_tables(P)
    checks: dict[str, Check] = {}
    witness = None
    for name, lhs in (("P_x_id", A1), ("id_x_P", A2)):
        bad = np.argwhere(lhs != A3)
        if len(bad):
            x, p, q = map(int, bad[0])
            witness = {
                "basis": x, "p": p, "q": q, "side": name,
                "lhs": frac_str(Fraction(int(lhs[x, p, q]), D * D)),
                "P_x_P": frac_str(Fraction(int(A3[x, p, q]), D * D)),
            }
            break
    checks["a_comultiplication"] = Check(witness is None, witness)

    witness = None
    for x, e in _basis(n):
        lhs = apply_expectation(P, e[g.inverse])
        rhs = apply_expectation(P, e)[g.inverse]
        if not all(a == b for a, b in zip(lhs, rhs)):
            witness = {"basis": x}
            break
    checks["b_involution"] = Check(witness is None, witness)

    witness = None
    for x, e in _basis(n):
        total = sum(apply_expectation(P, e))
        if total != 1:
            witness = {"basis": x, "sum_Pf": frac_str(total), "sum_f": "1"}
            break
    checks["c_haar"] = Check(witness is None, witness)
    return Report("hypergroup_conditions", checks)


def verify_l2_projection(P: ConditionalExpectation, g: GroupTable | None = None, seed: int = 0) -> Report:
    """P as an orthogonal projection on l2(G, counting measure)."""
    g = P.group if g is None else g
    if g != P.group:
        raise CarrierMismatch("expectation is defined on a different group")
    haar = verify_hypergroup_conditions(P, g)["c_haar"]
    if not haar.passed:
        raise HaarIncompatible(f"m o P != m: {haar.witness}")
    M = P.matrix()
    checks = {}
    M2 = M.dot(M)
    bad = np.argwhere(M2 != M)
    checks["idempotent"] = Check(not len(bad), bad[0].tolist() if len(bad) else None)
    # real matrix, counting measure: self-adjoint iff symmetric
    bad = np.argwhere(M != M.T)
    checks["self_adjoint"] = Check(not len(bad), bad[0].tolist() if len(bad) else None)

    rng = np.random.default_rng(seed)
    w1 = w2 = None
    for k in range(SAMPLES):
        f = random_gauss_vector(rng, g.order)
        pf = apply_expectation(P, f)
        if sum(abs2(z) for z in pf) > sum(abs2(z) for z in f):
            w2 = w2 or {"sample": k}
        n1f = sum(float(abs2(z)) ** 0.5 for z in f)
        n1pf = sum(float(abs2(z)) ** 0.5 for z in pf)
        if n1pf > n1f * (1 + 1e-12):
            w1 = w1 or {"sample": k}
    checks["l1_contraction"] = Check(w1 is None, w1)
    checks["l2_contraction"] = Check(w2 is None, w2)
    return Report("l2_projection", checks, {"seed": seed, "samples": SAMPLES})
