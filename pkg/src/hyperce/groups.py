"""Finite groups as multiplication tables, and the group-side operations.

Elements are the indices ``0..order-1``.  Measures and functions on a group are
plain coefficient vectors (numpy object arrays of exact rationals, or complex
floats where a spectrum is involved).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np


class GroupError(ValueError):
    pass


class NotClosed(GroupError):
    pass


class NotAssociative(GroupError):
    pass


class NoIdentity(GroupError):
    pass


class NoInverse(GroupError):
    pass


class CarrierMismatch(ValueError):
    pass


class LengthMismatch(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GroupTable:
    order: int
    mult: np.ndarray  # (order, order) int array, mult[p, q] = index of pq
    identity: int
    inverse: np.ndarray

    def __post_init__(self):
        self.mult.setflags(write=False)
        self.inverse.setflags(write=False)

    def mul(self, p: int, q: int) -> int:
        return int(self.mult[p, q])

    def inv(self, p: int) -> int:
        return int(self.inverse[p])

    @property
    def elements(self) -> range:
        return range(self.order)

    def is_abelian(self) -> bool:
        return bool((self.mult == self.mult.T).all())

    def to_json(self) -> dict:
        return {"order": self.order, "table": self.mult.tolist()}

    def __eq__(self, other):
        return (
            isinstance(other, GroupTable)
            and self.order == other.order
            and bool((self.mult == other.mult).all())
        )

    def __hash__(self):
        return hash((self.order, self.mult.tobytes()))


def validate_group(raw_table: Sequence[Sequence[int]]) -> GroupTable:
    """Check the group axioms on a raw Cayley table and return a GroupTable.

    Each failure raises the matching ``GroupError`` subclass naming the first
    offending element or triple.
    """
    try:
        mult = np.array(raw_table, dtype=np.int64)
    except (TypeError, ValueError) as exc:
        raise NotClosed(f"table is not a rectangular integer matrix: {exc}") from None
    if mult.ndim != 2 or mult.shape[0] != mult.shape[1] or mult.shape[0] == 0:
        raise NotClosed(f"table must be a nonempty square matrix, got shape {mult.shape}")
    n = mult.shape[0]
    bad = np.argwhere((mult < 0) | (mult >= n))
    if len(bad):
        p, q = map(int, bad[0])
        raise NotClosed(f"entry mult[{p}][{q}] = {int(mult[p, q])} is out of range 0..{n - 1}")

    # associativity: (pq)r == p(qr), checked for all n^3 triples at once
    left = mult[mult, :]  # left[p, q, r] = (pq)r
    right = mult[:, mult]  # right[p, q, r] = p(qr)
    bad = np.argwhere(left != right)
    if len(bad):
        p, q, r = map(int, bad[0])
        raise NotAssociative(f"({p}*{q})*{r} != {p}*({q}*{r})")

    ar = np.arange(n)
    identity = None
    for e in range(n):
        if (mult[e] == ar).all() and (mult[:, e] == ar).all():
            identity = e
            break
    if identity is None:
        raise NoIdentity("no two-sided identity element")

    inverse = np.full(n, -1, dtype=np.int64)
    for p in range(n):
        cands = np.flatnonzero(mult[p] == identity)
        for q in cands:
            if mult[q, p] == identity:
                inverse[p] = q
                break
        if inverse[p] < 0:
            raise NoInverse(f"element {p} has no two-sided inverse")
    return GroupTable(order=n, mult=mult, identity=identity, inverse=inverse)


def point_mass(n: int, p: int) -> np.ndarray:
    v = np.array([Fraction(0)] * n, dtype=object)
    v[p] = Fraction(1)
    return v


def uniform(n: int, support: Sequence[int] | None = None) -> np.ndarray:
    support = range(n) if support is None else list(support)
    v = np.array([Fraction(0)] * n, dtype=object)
    w = Fraction(1, len(support))
    for p in support:
        v[p] = w
    return v


def _check_len(vec, g: GroupTable, error=CarrierMismatch):
    if len(vec) != g.order:
        raise error(f"vector of length {len(vec)} does not live on a group of order {g.order}")


def group_convolve(mu, nu, g: GroupTable) -> np.ndarray:
    """(mu * nu)({r}) = sum over pq = r of mu({p}) nu({q})."""
    _check_len(mu, g)
    _check_len(nu, g)
    zero = 0 * mu[0] * nu[0]
    out = np.array([zero] * g.order, dtype=object)
    for p in g.elements:
        if mu[p] == 0:
            continue
        row = g.mult[p]
        for q in g.elements:
            if nu[q] != 0:
                out[row[q]] = out[row[q]] + mu[p] * nu[q]
    return out


def comult_apply(f, g: GroupTable) -> np.ndarray:
    """(Delta f)(p, q) = f(pq) as an order x order matrix."""
    _check_len(f, g, LengthMismatch)
    return np.asarray(f, dtype=object)[g.mult]


def group_check_involution(f, g: GroupTable) -> np.ndarray:
    """f-check(p) = f(p^{-1})."""
    _check_len(f, g, LengthMismatch)
    return np.asarray(f, dtype=object)[g.inverse]


def pushforward(mu, block_of: Sequence[int], nblocks: int) -> np.ndarray:
    """Image of a measure under the quotient map element -> block index."""
    zero = 0 * mu[0]
    out = np.array([zero] * nblocks, dtype=object)
    for p, b in enumerate(block_of):
        out[b] = out[b] + mu[p]
    return out
