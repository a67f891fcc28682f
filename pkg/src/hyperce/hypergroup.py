"""Finite hypergroups as structure-constant tables.

A table stores c[s][t][r] = (eps_s * eps_t)({r}) with exact rationals, the
identity point, the involution, Haar weights and the modular function.  The
construction from a conditional expectation pushes the G-side convolution of
the block measures P*(eps_s) forward to the block set.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._exact import conj, frac, frac_array, frac_str, rational_nullspace, scale_to_int
from .expectation import (
    ConditionalExpectation,
    adjoint_point_measure,
    orbit_pushforward,
    verify_expectation_axioms,
    verify_hypergroup_conditions,
)
from .groups import CarrierMismatch, GroupTable, LengthMismatch, group_convolve
from .report import Check, Report, automatic


class HypergroupError(ValueError):
    pass


class PreconditionFailed(HypergroupError):
    def __init__(self, message: str, report: Report):
        super().__init__(message)
        self.report = report


class InvolutionIllDefined(HypergroupError):
    pass


class NoPositiveSolution(HypergroupError):
    pass


class NonUniqueSolution(HypergroupError):
    pass


@dataclass(frozen=True, eq=False)
class HypergroupTable:
    size: int
    c: np.ndarray  # (size, size, size) object array of Fractions
    identity: int
    involution: tuple[int, ...]
    haar: tuple[Fraction, ...] | None = None
    modular: tuple[Fraction, ...] | None = None

    def __post_init__(self):
        if self.c.shape != (self.size,) * 3:
            raise HypergroupError(f"structure constants have shape {self.c.shape}, expected {(self.size,) * 3}")
        if len(self.involution) != self.size:
            raise HypergroupError("involution has the wrong length")
        if not 0 <= self.identity < self.size:
            raise HypergroupError("identity index out of range")
        self.c.setflags(write=False)

    def inv(self, s: int) -> int:
        return self.involution[s]

    @property
    def points(self) -> range:
        return range(self.size)

    def is_commutative(self) -> bool:
        return bool((self.c == self.c.transpose(1, 0, 2)).all())

    def product(self, s: int, t: int) -> np.ndarray:
        """The probability vector eps_s * eps_t."""
        return self.c[s, t]

    def to_json(self) -> dict:
        doc = {
            "size": self.size,
            "identity": self.identity,
            "involution": list(self.involution),
            "c": [[[frac_str(x) for x in self.c[s, t]] for t in self.points] for s in self.points],
        }
        if self.haar is not None:
            doc["haar"] = [frac_str(x) for x in self.haar]
        if self.modular is not None:
            doc["modular"] = [frac_str(x) for x in self.modular]
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "HypergroupTable":
        c = frac_array(doc["c"])
        haar = tuple(frac(x) for x in doc["haar"]) if doc.get("haar") is not None else None
        modular = tuple(frac(x) for x in doc["modular"]) if doc.get("modular") is not None else None
        return cls(int(doc["size"]), c, int(doc["identity"]), tuple(int(x) for x in doc["involution"]), haar, modular)

    def replace(self, **kw) -> "HypergroupTable":
        fields = dict(size=self.size, c=self.c, identity=self.identity, involution=self.involution,
                      haar=self.haar, modular=self.modular)
        fields.update(kw)
        return HypergroupTable(**fields)


def structure_constants(P: ConditionalExpectation) -> np.ndarray:
    """c[s][t] = phi_*(P*(eps_s) *_G P*(eps_t)), exact."""
    g = P.group
    Q = len(P.blocks)
    lifts = [adjoint_point_measure(P, s) for s in range(Q)]
    c = np.empty((Q, Q, Q), dtype=object)
    for s in range(Q):
        for t in range(Q):
            c[s, t] = orbit_pushforward(P, group_convolve(lifts[s], lifts[t], g))
    return c


def _block_involution(P: ConditionalExpectation) -> tuple[int, ...]:
    g = P.group
    out = []
    for s, b in enumerate(P.blocks):
        targets = {P.block_of[g.inv(p)] for p in b}
        if len(targets) != 1:
            raise InvolutionIllDefined(
                f"inverses of block {s} meet blocks {sorted(targets)}; P does not commute with inversion"
            )
        out.append(targets.pop())
    return tuple(out)


def solve_modular(c: np.ndarray, haar: Sequence[Fraction]) -> tuple[Fraction, ...]:
    """kappa(s) from sum_t m(t) c[t][s][r] = kappa(s) m(r); r is taken where m(r) is defined."""
    Q = c.shape[0]
    kappa = []
    for s in range(Q):
        lhs = [sum(haar[t] * c[t, s, r] for t in range(Q)) for r in range(Q)]
        ratios = {lhs[r] / haar[r] for r in range(Q)}
        if len(ratios) != 1:
            raise HypergroupError(f"no modular constant for point {s}: ratios {sorted(ratios)}")
        kappa.append(ratios.pop())
    return tuple(kappa)


def construct_hypergroup(P: ConditionalExpectation, g: GroupTable | None = None, seed: int = 0) -> HypergroupTable:
    """Build the quotient hypergroup of G determined by P."""
    g = P.group if g is None else g
    if g != P.group:
        raise CarrierMismatch("expectation is defined on a different group")
    rep = verify_expectation_axioms(P, seed=seed)
    if not rep.passed:
        raise PreconditionFailed(f"expectation axioms fail: {sorted(rep.failures())}", rep)
    rep = verify_hypergroup_conditions(P, g)
    if not rep.passed:
        raise PreconditionFailed(f"hypergroup conditions fail: {sorted(rep.failures())}", rep)

    c = structure_constants(P)
    involution = _block_involution(P)
    identity = P.block_of[g.identity]
    haar = tuple(Fraction(len(b)) for b in P.blocks)
    modular = solve_modular(c, haar)
    return HypergroupTable(len(P.blocks), c, identity, involution, haar, modular)


def naive_table(P: ConditionalExpectation) -> HypergroupTable:
    """Structure constants pushed forward with no hypothesis checks.

    Used to show what goes wrong when the construction's hypotheses fail.  The
    involution falls back to the block of the first element's inverse.
    """
    g = P.group
    c = structure_constants(P)
    involution = tuple(P.block_of[g.inv(b[0])] for b in P.blocks)
    haar = tuple(Fraction(len(b)) for b in P.blocks)
    try:
        modular = solve_modular(c, haar)
    except HypergroupError:
        modular = None
    return HypergroupTable(len(P.blocks), c, P.block_of[g.identity], involution, haar, modular)


# --- axiom verification ---------------------------------------------------------

def _first(mask: np.ndarray):
    bad = np.argwhere(mask)
    return tuple(int(i) for i in bad[0]) if len(bad) else None


def _assoc_sides(h: HypergroupTable):
    ci, _ = scale_to_int(h.c)
    left = np.einsum("str,ruv->stuv", ci, ci)  # (eps_s * eps_t) * eps_u
    right = np.einsum("tur,srv->stuv", ci, ci)  # eps_s * (eps_t * eps_u)
    return left, right


def verify_djs(h: HypergroupTable) -> Report:
    """Check the hypergroup axioms, Haar invariance and the modular identity.

    Every check is exact.  Witness indices follow the axiom's own variable
    names.  Continuity and the topology axioms are trivial for a finite
    discrete space and are reported as such.
    """
    Q, c, e, inv = h.size, h.c, h.identity, h.involution
    checks: dict[str, Check] = {}

    left, right = _assoc_sides(h)
    w = _first(left != right)
    checks["H1_associative"] = Check(w is None, w and dict(zip("stuv", w)))

    neg = _first(c < 0)
    sums = c.sum(axis=2)
    unsummed = _first(sums != 1)
    if neg is not None:
        checks["H2_probability"] = Check(False, {"s": neg[0], "t": neg[1], "r": neg[2], "reason": "negative"})
    elif unsummed is not None:
        checks["H2_probability"] = Check(False, {"s": unsummed[0], "t": unsummed[1], "reason": "mass != 1"})
    else:
        checks["H2_probability"] = Check(True)
    checks["H3_continuity"] = automatic()
    checks["H4_support_continuity"] = automatic()

    eye = np.array([[Fraction(int(s == r)) for r in range(Q)] for s in range(Q)], dtype=object)
    w = _first(c[e] != eye)
    w2 = _first(c[:, e] != eye)
    witness = {"side": "left", "s": w[0], "r": w[1]} if w else ({"side": "right", "s": w2[0], "r": w2[1]} if w2 else None)
    checks["H5_identity"] = Check(witness is None, witness)

    witness = None
    if not all(0 <= inv[s] < Q and inv[inv[s]] == s for s in range(Q)):
        witness = {"s": next(s for s in range(Q) if not (0 <= inv[s] < Q and inv[inv[s]] == s)),
                   "reason": "not an involution"}
    else:
        for s in range(Q):
            for t in range(Q):
                for r in range(Q):
                    if c[s, t, inv[r]] != c[inv[t], inv[s], r]:
                        witness = {"s": s, "t": t, "r": r}
                        break
                if witness:
                    break
            if witness:
                break
    checks["H6_involution"] = Check(witness is None, witness)

    witness = None
    if all(0 <= inv[s] < Q for s in range(Q)):
        for s in range(Q):
            for t in range(Q):
                if (c[s, inv[t], e] > 0) != (s == t):
                    witness = {"s": s, "t": t}
                    break
            if witness:
                break
    else:
        witness = {"reason": "involution out of range"}
    checks["H7_identity_support"] = Check(witness is None, witness)

    if h.haar is None:
        checks["left_invariance"] = Check(False, {"reason": "no Haar weights"})
        checks["modular_identity"] = Check(False, {"reason": "no Haar weights"})
    else:
        m = np.array(h.haar, dtype=object)
        witness = None
        if any(x <= 0 for x in m):
            witness = {"reason": "Haar weights must be positive"}
        else:
            inv_lhs = np.einsum("str,t->sr", c, m)  # sum_t c[s][t][r] m(t)
            bad = _first(inv_lhs != m[None, :])
            if bad:
                witness = {"s": bad[0], "r": bad[1], "lhs": frac_str(inv_lhs[bad]), "m_r": frac_str(m[bad[1]])}
        checks["left_invariance"] = Check(witness is None, witness)

        witness = None
        if h.modular is None:
            witness = {"reason": "no modular function"}
        else:
            k = np.array(h.modular, dtype=object)
            mod_lhs = np.einsum("t,tsr->sr", m, c)  # sum_t m(t) c[t][s][r]
            bad = _first(mod_lhs != np.outer(k, m))
            if bad:
                witness = {"s": bad[0], "r": bad[1]}
        checks["modular_identity"] = Check(witness is None, witness)
    return Report("djs_axioms", checks)


def comultiply(f, h: HypergroupTable) -> np.ndarray:
    """(Delta~ f)(s, t) = <f, eps_s * eps_t> = sum_r c[s][t][r] f(r)."""
    if len(f) != h.size:
        raise LengthMismatch(f"function of length {len(f)} on a hypergroup of size {h.size}")
    return np.einsum("str,r->st", h.c, np.asarray(f, dtype=object))


def counit(f, h: HypergroupTable):
    return f[h.identity]


def verify_dual_axioms(h: HypergroupTable) -> Report:
    """Check the function-side (comultiplication) form of the axioms on all basis indicators."""
    Q, e, inv = h.size, h.identity, h.involution
    checks: dict[str, Check] = {}
    basis = []
    for v in range(Q):
        f = np.array([Fraction(0)] * Q, dtype=object)
        f[v] = Fraction(1)
        basis.append(f)
    deltas = [comultiply(f, h) for f in basis]

    witness = None
    for v, d in enumerate(deltas):
        # (Delta~ x id) Delta~ f  and  (id x Delta~) Delta~ f, as functions of (s, t, u)
        lhs = np.einsum("str,ru->stu", h.c, d)
        rhs = np.einsum("tur,sr->stu", h.c, d)
        bad = _first(lhs != rhs)
        if bad:
            witness = {"basis": v, "s": bad[0], "t": bad[1], "u": bad[2]}
            break
    checks["H1_coassociative"] = Check(witness is None, witness)

    witness = next(({"basis": v} for v, d in enumerate(deltas) if (d < 0).any()), None)
    checks["H2a_positive"] = Check(witness is None, witness)
    one = comultiply(np.array([Fraction(1)] * Q, dtype=object), h)
    bad = _first(one != 1)
    checks["H2b_unital"] = Check(bad is None, bad and {"s": bad[0], "t": bad[1]})
    checks["H2c_bounded"] = automatic()
    checks["H4_continuity"] = automatic()

    witness = None
    for v, (f, d) in enumerate(zip(basis, deltas)):
        if not ((d[e, :] == f).all() and (d[:, e] == f).all()):
            witness = {"basis": v}
            break
    checks["H5_counit"] = Check(witness is None, witness)

    witness = None
    valid_inv = all(0 <= inv[s] < Q for s in range(Q))
    for v, (f, d) in enumerate(zip(basis, deltas)):
        if not valid_inv:
            witness = {"reason": "involution out of range"}
            break
        lhs = comultiply(f[list(inv)], h)  # Delta~(f-check)
        rhs = d[np.ix_(inv, inv)].T  # flip o (check x check) o Delta~
        bad = _first(lhs != rhs)
        if bad:
            witness = {"basis": v, "s": bad[0], "t": bad[1]}
            break
    checks["H6_involution"] = Check(witness is None, witness)

    pos = np.ones((Q, Q), dtype=bool)
    for v, d in enumerate(deltas):
        if basis[v][e] > 0:
            pos &= d > 0
    expected = np.zeros((Q, Q), dtype=bool)
    if valid_inv:
        for s in range(Q):
            expected[s, inv[s]] = True
    bad = _first(pos != expected)
    checks["H7_identity_support"] = Check(bad is None, bad and {"s": bad[0], "t": bad[1]})
    return Report("dual_axioms", checks)


def haar_solve(h: HypergroupTable) -> np.ndarray:
    """Left Haar weights from sum_t c[s][t][r] x(t) = x(r), normalised to x(identity) = 1."""
    Q = h.size
    rows = []
    for s in range(Q):
        for r in range(Q):
            rows.append([h.c[s, t, r] - (1 if t == r else 0) for t in range(Q)])
    ns = rational_nullspace(rows, Q)
    if not ns:
        raise NoPositiveSolution("the invariance system has only the zero solution")
    if len(ns) > 1:
        raise NonUniqueSolution(f"invariant measures form a {len(ns)}-dimensional space")
    x = ns[0]
    if x[h.identity] == 0:
        raise NoPositiveSolution("invariant vector vanishes at the identity")
    x = [v / x[h.identity] for v in x]
    if any(v <= 0 for v in x):
        raise NoPositiveSolution(f"invariant vector is not positive: {[frac_str(v) for v in x]}")
    return np.array(x, dtype=object)


# --- L1(Q, m~) operations ---------------------------------------------------------

def _need_haar(h: HypergroupTable):
    if h.haar is None or h.modular is None:
        raise HypergroupError("table has no Haar weights / modular function")


def l1_convolve(f, g, h: HypergroupTable) -> np.ndarray:
    """(f*g)(s) = sum_t m(t) f(t) sum_r c[t-check][s][r] g(r).

    This is convolution of the measures f m and g m, divided by m.
    """
    _need_haar(h)
    if len(f) != h.size or len(g) != h.size:
        raise LengthMismatch("function length does not match the hypergroup size")
    Q = h.size
    g = np.asarray(g, dtype=object)
    out = []
    for s in range(Q):
        acc = 0 * f[0] * g[0]
        for t in range(Q):
            if f[t] == 0:
                continue
            acc = acc + h.haar[t] * f[t] * h.c[h.involution[t], s].dot(g)
        out.append(acc)
    return np.array(out, dtype=object)


def l1_star(f, h: HypergroupTable) -> np.ndarray:
    """f*(s) = kappa(s)^-1 conj(f(s-check))."""
    _need_haar(h)
    if len(f) != h.size:
        raise LengthMismatch("function length does not match the hypergroup size")
    return np.array([conj(f[h.involution[s]]) / h.modular[s] for s in range(h.size)], dtype=object)


def l1_dagger(f, h: HypergroupTable) -> np.ndarray:
    """f-dagger(s) = conj(f(s-check))."""
    if len(f) != h.size:
        raise LengthMismatch("function length does not match the hypergroup size")
    return np.array([conj(f[h.involution[s]]) for s in range(h.size)], dtype=object)


def measure_convolve(mu, nu, h: HypergroupTable) -> np.ndarray:
    """(mu * nu)({r}) = sum_{s,t} mu(s) nu(t) c[s][t][r]."""
    return np.einsum("s,t,str->r", np.asarray(mu, dtype=object), np.asarray(nu, dtype=object), h.c)
