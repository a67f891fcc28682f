"""Regular representations on l2(Q, m~) and positive-definite functions.

All operators carry the Haar weights of the space they act on, and adjoints
are always taken against the weighted inner product

    (f, g) = sum_s m(s) f(s) conj(g(s)),

so the adjoint of a matrix A is D^-1 A^H D with D = diag(m).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._exact import (
    as_complex_array,
    conj,
    exact_equal,
    random_rational_vector,
    rational_sqrt,
)
from .groups import LengthMismatch
from .hypergroup import HypergroupTable, comultiply
from .report import Check, Report

PSD_TOL = 1e-9
EIG_SEPARATION = 1e-7


class NotCommutative(ValueError):
    pass


class DegenerateSpectrum(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    entries: np.ndarray
    inner_weights: tuple[Fraction, ...]

    def __post_init__(self):
        n = self.entries.shape[0]
        if self.entries.shape != (n, n) or len(self.inner_weights) != n:
            raise DimensionMismatch(
                f"operator of shape {self.entries.shape} with {len(self.inner_weights)} weights"
            )

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def exact(self) -> bool:
        return self.entries.dtype == object

    def adjoint(self) -> "OperatorMatrix":
        """Adjoint against the weighted inner product: D^-1 A^H D."""
        w = self.inner_weights
        n = self.dim
        if self.exact:
            out = np.empty((n, n), dtype=object)
            for i in range(n):
                for j in range(n):
                    out[i, j] = conj(self.entries[j, i]) * w[j] / w[i]
        else:
            d = np.array([float(x) for x in w])
            out = (self.entries.conj().T * d[None, :]) / d[:, None]
        return OperatorMatrix(out, w)

    def standardized(self) -> np.ndarray:
        """D^1/2 A D^-1/2 as a complex matrix: unitarily equivalent, unweighted adjoint."""
        d = np.sqrt(np.array([float(x) for x in self.inner_weights]))
        return as_complex_array(self.entries) * d[:, None] / d[None, :]

    def op_norm(self) -> float:
        return float(np.linalg.norm(self.standardized(), 2))

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return OperatorMatrix(self.entries.dot(other.entries), self.inner_weights)

    def kron(self, other: "OperatorMatrix") -> "OperatorMatrix":
        w = tuple(a * b for a in self.inner_weights for b in other.inner_weights)
        return OperatorMatrix(np.kron(self.entries, other.entries), w)


def _weights(h: HypergroupTable) -> tuple[Fraction, ...]:
    if h.haar is None:
        raise ValueError("hypergroup table has no Haar weights")
    return h.haar


def left_regular(h: HypergroupTable) -> list[OperatorMatrix]:
    """L_s with (L_s f)(t) = sum_r c[s-check][t][r] f(r)."""
    w = _weights(h)
    return [OperatorMatrix(np.array(h.c[h.involution[s]], dtype=object), w) for s in h.points]


def right_regular(h: HypergroupTable) -> list[OperatorMatrix]:
    """R_s with (R_s f)(t) = kappa(s)^1/2 sum_r c[t][s][r] f(r).

    Entries stay exact when every kappa(s) is a rational square (always so
    for unimodular tables); otherwise the operators are complex floats.
    """
    w = _weights(h)
    roots = [rational_sqrt(k) for k in h.modular]
    out = []
    for s in h.points:
        block = np.array(h.c[:, s, :], dtype=object)
        if all(r is not None for r in roots):
            out.append(OperatorMatrix(block * roots[s], w))
        else:
            out.append(OperatorMatrix(as_complex_array(block) * float(h.modular[s]) ** 0.5, w))
    return out


def _identity_like(op: OperatorMatrix) -> np.ndarray:
    n = op.dim
    if op.exact:
        return np.array([[Fraction(int(i == j)) for j in range(n)] for i in range(n)], dtype=object)
    return np.eye(n, dtype=complex)


def _equal(a: np.ndarray, b: np.ndarray, tol: float) -> bool:
    if a.dtype == object and b.dtype == object:
        return all(exact_equal(x, y) for x, y in zip(a.ravel(), b.ravel()))
    return bool(np.allclose(as_complex_array(a), as_complex_array(b), atol=tol, rtol=0))


def verify_representation(pi: Sequence[OperatorMatrix], h: HypergroupTable, tol: float = 1e-12) -> Report:
    """Check pi(e~) = I, pi(s)^dagger = pi(s-check) and the product rule.

    The product rule (pi(s) pi(t) xi, eta) = sum_r c[s][t][r] (pi(r) xi, eta)
    over basis vectors xi, eta is the matrix identity pi(s)pi(t) =
    sum_r c[s][t][r] pi(r).  Exact operators are compared exactly.
    """
    if len(pi) != h.size:
        raise DimensionMismatch(f"{len(pi)} operators for {h.size} points")
    dims = {p.dim for p in pi}
    if len(dims) != 1:
        raise DimensionMismatch(f"operators of differing dimensions {sorted(dims)}")
    checks = {}
    e = h.identity
    checks["i_unit"] = Check(_equal(pi[e].entries, _identity_like(pi[e]), tol))

    witness = None
    for s in h.points:
        if not _equal(pi[s].adjoint().entries, pi[h.involution[s]].entries, tol):
            witness = {"s": s}
            break
    checks["ii_adjoint"] = Check(witness is None, witness)

    witness = None
    for s in h.points:
        for t in h.points:
            lhs = pi[s].entries.dot(pi[t].entries)
            rhs = sum((h.c[s, t, r] * pi[r].entries for r in h.points if h.c[s, t, r] != 0),
                      start=0 * lhs)
            if not _equal(lhs, rhs, tol):
                witness = {"s": s, "t": t}
                break
        if witness:
            break
    checks["iii_product"] = Check(witness is None, witness)
    return Report("representation", checks)


def trivial_representation(h: HypergroupTable) -> list[OperatorMatrix]:
    return [OperatorMatrix(np.array([[Fraction(1)]], dtype=object), (Fraction(1),)) for _ in h.points]


@dataclass(frozen=True)
class PositiveDefiniteResult:
    is_pd: bool
    min_eigenvalue: float
    hermitian: bool


def pd_matrix(phi, h: HypergroupTable) -> np.ndarray:
    """M[i][j] = (Delta~ phi)(p_i, p_j-check)."""
    if len(phi) != h.size:
        raise LengthMismatch(f"function of length {len(phi)} on a hypergroup of size {h.size}")
    d = comultiply(np.asarray(phi, dtype=object), h)
    return d[:, list(h.involution)]


def positive_definite_check(phi, h: HypergroupTable, tol: float = PSD_TOL) -> PositiveDefiniteResult:
    M = as_complex_array(pd_matrix(phi, h))
    scale = float(np.linalg.norm(M, 2))
    herm = bool(np.allclose(M, M.conj().T, atol=tol * max(scale, 1e-300), rtol=0))
    lam = float(np.linalg.eigvalsh((M + M.conj().T) / 2).min())
    return PositiveDefiniteResult(herm and lam >= -tol * scale, lam, herm)


def characters(h: HypergroupTable, seed: int = 0, attempts: int = 8) -> list[np.ndarray]:
    """Characters of a commutative table: joint eigenvectors of the L_s with chi(e~) = 1.

    A random rational combination of the L_s has simple spectrum with
    probability one; its eigenvectors are then the characters.
    """
    if not h.is_commutative():
        raise NotCommutative("characters are only computed for commutative tables")
    Ls = [as_complex_array(L.entries) for L in left_regular(h)]
    rng = np.random.default_rng(seed)
    for _ in range(attempts):
        coeffs = [float(x) for x in random_rational_vector(rng, h.size)]
        X = sum(a * L for a, L in zip(coeffs, Ls))
        vals, vecs = np.linalg.eig(X)
        gaps = np.abs(vals[:, None] - vals[None, :])
        np.fill_diagonal(gaps, np.inf)
        if gaps.min() < EIG_SEPARATION:
            continue
        chars = []
        for k in range(h.size):
            v = vecs[:, k]
            if abs(v[h.identity]) < EIG_SEPARATION:
                break
            chars.append(v / v[h.identity])
        else:
            chars = _sorted_characters(chars, h)
            if all(_is_multiplicative(chi, h, 1e-9) for chi in chars):
                return chars
    raise DegenerateSpectrum("could not separate the joint eigenspaces")


def _sorted_characters(chars, h):
    one = np.ones(h.size)
    chars = sorted(chars, key=lambda x: (not np.allclose(x, one), tuple(np.round(x.real, 9)), tuple(np.round(x.imag, 9))))
    return chars


def _is_multiplicative(chi, h: HypergroupTable, tol: float) -> bool:
    c = np.array(h.c, dtype=float)
    lhs = np.einsum("str,r->st", c, chi)
    return bool(np.allclose(lhs, np.outer(chi, chi), atol=tol, rtol=0))


def rational_characters(h: HypergroupTable, seed: int = 0, max_denominator: int = 10_000) -> list[np.ndarray]:
    """Characters recovered as exact rationals, verified exactly.

    Raises ValueError when some character is not rational (e.g. Z_n, n > 2,
    has complex characters).
    """
    out = []
    for chi in characters(h, seed=seed):
        if np.abs(chi.imag).max() > 1e-9:
            raise ValueError("character has a nonreal value")
        ex = np.array([Fraction(float(x)).limit_denominator(max_denominator) for x in chi.real], dtype=object)
        prod = np.einsum("str,r->st", h.c, ex)
        if not (prod == np.outer(ex, ex)).all():
            raise ValueError("character is not rational")
        out.append(ex)
    return out
