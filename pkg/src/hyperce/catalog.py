"""Built-in groups with human-readable element labels.

The core works on indices only; labels live here for the CLI and for tests
that want to talk about ``(12)`` rather than element 1.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .groups import GroupTable, validate_group


class UnknownName(KeyError):
    pass


@dataclass(frozen=True)
class NamedGroup:
    name: str
    table: GroupTable
    labels: tuple[str, ...]

    def index(self, label) -> int:
        if isinstance(label, (int, np.integer)) and not isinstance(label, bool):
            if not 0 <= int(label) < self.table.order:
                raise UnknownName(f"element index {label} out of range for {self.name}")
            return int(label)
        key = str(label).replace(" ", "")
        for i, lab in enumerate(self.labels):
            if lab.replace(" ", "") == key:
                return i
        raise UnknownName(f"{self.name} has no element labelled {label!r}")


def _from_elements(name, elements, op, label):
    index = {x: i for i, x in enumerate(elements)}
    table = [[index[op(a, b)] for b in elements] for a in elements]
    return NamedGroup(name, validate_group(table), tuple(label(x) for x in elements))


def cyclic(n: int) -> NamedGroup:
    return _from_elements(f"Z{n}", list(range(n)), lambda a, b: (a + b) % n, str)


def _compose(p, q):
    # (pq)(x) = p(q(x)): q acts first
    return tuple(p[q[x]] for x in range(len(p)))


def _cycle_label(perm) -> str:
    seen, cycles = set(), []
    for start in range(len(perm)):
        if start in seen or perm[start] == start:
            continue
        cyc, x = [], start
        while x not in seen:
            seen.add(x)
            cyc.append(x + 1)
            x = perm[x]
        cycles.append("(" + "".join(map(str, cyc)) + ")")
    return "".join(cycles) or "e"


def symmetric3() -> NamedGroup:
    # e, (12), (13), (23), (123), (132)
    perms = [(0, 1, 2), (1, 0, 2), (2, 1, 0), (0, 2, 1), (1, 2, 0), (2, 0, 1)]
    return _from_elements("S3", perms, _compose, _cycle_label)


def symmetric4() -> NamedGroup:
    perms = sorted(itertools.permutations(range(4)), key=lambda p: (_perm_order(p), p))
    return _from_elements("S4", perms, _compose, _cycle_label)


def _perm_order(p) -> int:
    k, q = 1, p
    while q != tuple(range(len(p))):
        q = _compose(p, q)
        k += 1
    return k


def dihedral4() -> NamedGroup:
    """Symmetries of a square acting on vertices 0..3: r^k and r^k s."""
    r = (1, 2, 3, 0)
    s = (0, 3, 2, 1)
    e = (0, 1, 2, 3)
    rots = [e]
    for _ in range(3):
        rots.append(_compose(r, rots[-1]))
    elements = rots + [_compose(x, s) for x in rots]
    names = {x: n for x, n in zip(elements, ["e", "r", "r2", "r3", "s", "rs", "r2s", "r3s"])}
    return _from_elements("D4", elements, _compose, names.__getitem__)


def quaternion8() -> NamedGroup:
    """Q8 as unit quaternions (w, x, y, z) with integer coordinates."""

    def qmul(a, b):
        a0, a1, a2, a3 = a
        b0, b1, b2, b3 = b
        return (
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        )

    units = [(1, 0, 0, 0), (-1, 0, 0, 0), (0, 1, 0, 0), (0, -1, 0, 0),
             (0, 0, 1, 0), (0, 0, -1, 0), (0, 0, 0, 1), (0, 0, 0, -1)]
    names = dict(zip(units, ["1", "-1", "i", "-i", "j", "-j", "k", "-k"]))
    return _from_elements("Q8", units, qmul, names.__getitem__)


GROUP_NAMES = tuple([f"Z{n}" for n in range(1, 13)] + ["S3", "S4", "D4", "Q8"])
BUILDER_NAMES = ("id", "double_coset", "conjugation", "automorphism_orbit")


def get_group(name: str) -> NamedGroup:
    key = name.replace("_", "").strip()
    if key.upper().startswith("Z") and key[1:].isdigit():
        n = int(key[1:])
        if 1 <= n <= 12:
            return cyclic(n)
    builders = {"S3": symmetric3, "S4": symmetric4, "D4": dihedral4, "Q8": quaternion8}
    if key.upper() in builders:
        return builders[key.upper()]()
    raise UnknownName(f"unknown group {name!r}; known: {', '.join(GROUP_NAMES)}")


def cyclic_automorphisms(n: int) -> list[list[int]]:
    """All automorphisms x -> kx of Z_n, gcd(k, n) = 1."""
    return [[(k * x) % n for x in range(n)] for k in range(1, max(n, 2)) if math.gcd(k, n) == 1]


def inner_automorphisms(g: GroupTable) -> list[list[int]]:
    perms = {tuple(int(g.mult[g.mult[h, p], g.inverse[h]]) for p in g.elements) for h in g.elements}
    return [list(p) for p in sorted(perms)]


def catalog_list() -> dict:
    return {"groups": list(GROUP_NAMES), "builders": list(BUILDER_NAMES)}
