"""Exact scalar helpers: rationals, Gaussian rationals and scaled-integer arrays."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from sympy.polys.domains import QQ, QQ_I
from sympy.polys.matrices import DomainMatrix

# Largest magnitude we let an int64 accumulator reach before falling back to objects.
_INT64_SAFE = 2**62


def frac(x) -> Fraction:
    """Coerce ints, Fractions and "p/q" strings to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        raise TypeError(f"refusing to coerce float {x!r} to an exact rational")
    # gmpy2.mpq and friends
    return Fraction(int(x.numerator), int(x.denominator))


def frac_str(x: Fraction) -> str:
    x = frac(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def frac_array(values) -> np.ndarray:
    arr = np.asarray(values, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        out[idx] = frac(v)
    return out


# --- Gaussian rationals -------------------------------------------------------

def gauss(re, im=0):
    return QQ_I(QQ(frac(re).numerator, frac(re).denominator),
                QQ(frac(im).numerator, frac(im).denominator))


def to_gauss(z):
    if isinstance(z, type(QQ_I.one)):
        return z
    return gauss(z)


def conj(z):
    if isinstance(z, type(QQ_I.one)):
        return QQ_I(z.x, -z.y)
    if isinstance(z, (int, Fraction)):
        return z
    return np.conj(z)


def real_part(z) -> Fraction:
    if isinstance(z, type(QQ_I.one)):
        return frac(z.x)
    return frac(z)


def imag_part(z) -> Fraction:
    if isinstance(z, type(QQ_I.one)):
        return frac(z.y)
    return Fraction(0)


def abs2(z) -> Fraction:
    """|z|^2 as an exact rational."""
    return real_part(z) ** 2 + imag_part(z) ** 2


def exact_equal(a, b) -> bool:
    """Equality across Fraction / Gaussian rational representations."""
    return real_part(a) == real_part(b) and imag_part(a) == imag_part(b)


def to_complex(z) -> complex:
    if isinstance(z, (float, complex, np.floating, np.complexfloating)):
        return complex(z)
    return complex(float(real_part(z)), float(imag_part(z)))


def as_complex_array(arr) -> np.ndarray:
    arr = np.asarray(arr)
    if arr.dtype != object:
        return arr.astype(complex)
    out = np.empty(arr.shape, dtype=complex)
    for idx, v in np.ndenumerate(arr):
        out[idx] = to_complex(v)
    return out


def as_float_array(arr) -> np.ndarray:
    arr = np.asarray(arr)
    if arr.dtype != object:
        return arr.astype(float)
    out = np.empty(arr.shape, dtype=float)
    for idx, v in np.ndenumerate(arr):
        out[idx] = float(v)
    return out


# --- random exact samples -----------------------------------------------------

def random_rational(rng: np.random.Generator, bound: int = 9, signed: bool = True) -> Fraction:
    lo = -bound if signed else 0
    return Fraction(int(rng.integers(lo, bound + 1)), int(rng.integers(1, bound + 1)))


def random_rational_vector(rng, n: int, bound: int = 9, signed: bool = True) -> np.ndarray:
    return np.array([random_rational(rng, bound, signed) for _ in range(n)], dtype=object)


def random_gauss_vector(rng, n: int, bound: int = 9) -> np.ndarray:
    return np.array(
        [gauss(random_rational(rng, bound), random_rational(rng, bound)) for _ in range(n)],
        dtype=object,
    )


# --- scaled integer arithmetic ------------------------------------------------

def common_denominator(values: Iterable) -> int:
    d = 1
    for v in values:
        d = math.lcm(d, frac(v).denominator)
    return d


def scale_to_int(arr, denom: int | None = None) -> tuple[np.ndarray, int]:
    """Return (D*arr as an integer array, D) with D a common denominator.

    The integer array is int64 when every entry is small enough, otherwise an
    object array of Python ints, so downstream products stay exact either way.
    """
    arr = np.asarray(arr, dtype=object)
    if denom is None:
        denom = common_denominator(arr.ravel())
    ints = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        v = frac(v) * denom
        ints[idx] = v.numerator
    return shrink_int(ints), denom


def shrink_int(ints: np.ndarray) -> np.ndarray:
    if ints.size == 0:
        return ints.astype(np.int64)
    biggest = max(abs(int(v)) for v in ints.ravel())
    # leave headroom for one product plus a sum of up to 2^20 terms
    if biggest * biggest < _INT64_SAFE >> 20:
        return ints.astype(np.int64)
    return ints.astype(object)


def int_einsum(spec: str, *ops: np.ndarray) -> np.ndarray:
    """einsum that keeps integer results exact (object dtype if any operand is)."""
    if any(o.dtype == object for o in ops):
        return np.einsum(spec, *[o.astype(object) for o in ops], optimize=False)
    return np.einsum(spec, *ops)


# --- exact linear algebra -----------------------------------------------------

def rational_nullspace(rows: Sequence[Sequence[Fraction]], ncols: int) -> list[list[Fraction]]:
    """Basis of the right nullspace of a rational matrix, in reduced form."""
    if not rows:
        return [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    data = [[QQ(frac(v).numerator, frac(v).denominator) for v in row] for row in rows]
    dm = DomainMatrix(data, (len(rows), ncols), QQ)
    ns = dm.nullspace().to_Matrix()
    return [[frac(ns[i, j]) for j in range(ncols)] for i in range(ns.rows)]


def rational_sqrt(x: Fraction) -> Fraction | None:
    """Exact square root of a nonnegative rational, or None if irrational."""
    x = frac(x)
    if x < 0:
        return None
    n, d = math.isqrt(x.numerator), math.isqrt(x.denominator)
    if n * n == x.numerator and d * d == x.denominator:
        return Fraction(n, d)
    return None
