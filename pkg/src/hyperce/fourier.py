"""Complete positivity of (lambda x lambda) o delta and Fourier-space norms.

CP certificate
--------------
A linear map phi from a *-algebra B into B(H) is completely positive iff
sum_{i,j} a_j^* phi(b_j* b_i) a_i >= 0 for every finite tuple.  Writing each
b_i in a fixed basis {e_s} of B, b_i = sum_s x_is e_s, the sum becomes

    sum_{s,t} a'_t^* phi(e_t* e_s) a'_s,   a'_s = sum_i x_is a_i,

so it suffices that the single block operator T with (t, s) block
phi(e_t* e_s) is positive on H^|basis|.  For phi = (lambda x lambda) o delta
on L1(Q, m~) with e_s = 1_s / m~(s), T has dimension |Q| * |Q|^2 and one
eigenvalue problem decides complete positivity.

Norms
-----
The reduced C*-algebra is the matrix algebra spanned by the L_s.  It splits
into full matrix blocks M_{n_k}; a functional with density rho_k on block k
has norm sum_k ||rho_k||_trace.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._exact import (
    as_complex_array,
    random_rational_vector,
    scale_to_int,
)
from .groups import CarrierMismatch
from .hypergroup import HypergroupTable, l1_convolve, l1_dagger, l1_star
from .representation import OperatorMatrix, PSD_TOL, left_regular, positive_definite_check
from .report import Check, Report

RESIDUAL_TOL = 1e-8
CLUSTER_TOL = 1e-7
RETRIES = 8


class DecompositionFailed(RuntimeError):
    pass


class DecompositionMismatch(ValueError):
    pass


# --- delta and Phi ----------------------------------------------------------------

def delta_extend(mu) -> np.ndarray:
    """delta(mu) on Q x Q: the mass of {s} moved to (s, s)."""
    n = len(mu)
    zero = 0 * mu[0]
    out = np.array([[zero] * n for _ in range(n)], dtype=object)
    for s in range(n):
        out[s, s] = mu[s]
    return out


def pair(measure2: np.ndarray, F: np.ndarray):
    """<mu, F> for a measure and a function on Q x Q."""
    return (np.asarray(measure2, dtype=object) * np.asarray(F, dtype=object)).sum()


def _kron_squares(h: HypergroupTable) -> list[OperatorMatrix]:
    return [L.kron(L) for L in left_regular(h)]


def phi_map(mu, h: HypergroupTable) -> OperatorMatrix:
    """Phi(mu) = sum_s mu({s}) L_s (x) L_s on l2(Q, m~) (x) l2(Q, m~)."""
    if len(mu) != h.size:
        raise CarrierMismatch(f"measure of length {len(mu)} on a hypergroup of size {h.size}")
    K = _kron_squares(h)
    ent = sum((mu[s] * K[s].entries for s in h.points if mu[s] != 0), start=0 * K[0].entries)
    return OperatorMatrix(ent, K[0].inner_weights)


def l1_basis(h: HypergroupTable) -> list[np.ndarray]:
    """b_s = 1_s / m~(s), so that b_s m~ is the point mass at s."""
    out = []
    for s in h.points:
        b = np.array([Fraction(0)] * h.size, dtype=object)
        b[s] = 1 / h.haar[s]
        out.append(b)
    return out


@dataclass(frozen=True)
class CPCertificate:
    is_cp: bool
    min_eigenvalue: float
    matrix_dim: int
    norm: float
    hermitian_exact: bool

    def to_dict(self) -> dict:
        return {
            "is_cp": self.is_cp,
            "min_eigenvalue": self.min_eigenvalue,
            "matrix_dim": self.matrix_dim,
            "norm": self.norm,
            "hermitian_exact": self.hermitian_exact,
        }


def takesaki_matrix(h: HypergroupTable) -> tuple[np.ndarray, int, np.ndarray, int]:
    """Exact block matrix with (t, s) block Phi(b_t* * b_s), as scaled integers.

    Returns (T_int, D_T, W_int, D_W) where T = T_int / D_T and the diagonal
    weights of the tensor-square inner product are W = W_int / D_W.
    """
    Q = h.size
    basis = l1_basis(h)
    stars = [l1_star(b, h) for b in basis]
    # coefficients of the measure (b_t* * b_s) m~ at each point r
    coeff = np.empty((Q, Q, Q), dtype=object)
    for t in range(Q):
        for s in range(Q):
            g = l1_convolve(stars[t], basis[s], h)
            coeff[t, s] = [g[r] * h.haar[r] for r in range(Q)]
    K = np.array([k.entries for k in _kron_squares(h)], dtype=object)  # [r, a, b]
    ci, dc = scale_to_int(coeff)
    ki, dk = scale_to_int(K)
    T = np.einsum("tsr,rab->tasb", ci, ki).reshape(Q ** 3, Q ** 3)
    w = np.array([a * b for a in h.haar for b in h.haar] * Q, dtype=object)
    wi, dw = scale_to_int(w)
    return T, dc * dk, wi, dw


def takesaki_cp_certificate(h: HypergroupTable, tol: float = PSD_TOL) -> CPCertificate:
    """Decide complete positivity of Phi with one Hermitian eigenvalue problem.

    T is self-adjoint for the weighted inner product, i.e. W T is symmetric;
    this is checked exactly before the similarity W^1/2 T W^-1/2 is handed to
    the eigensolver.
    """
    T, dT, W, _ = takesaki_matrix(h)
    WT = W[:, None] * T
    hermitian = bool((WT == WT.T).all())
    wf = np.sqrt(W.astype(float))
    S = (T.astype(float) / dT) * wf[:, None] / wf[None, :]
    eig = np.linalg.eigvalsh((S + S.T) / 2)
    norm = float(np.abs(eig).max())
    lam = float(eig.min())
    return CPCertificate(hermitian and lam >= -tol * norm, lam, T.shape[0], norm, hermitian)


# --- block decomposition ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BlockDecomposition:
    """Wedderburn decomposition of the *-algebra generated by some operators.

    ``basis_change`` is a unitary U for the standardized operators
    D^1/2 A D^-1/2: U^H A U is block diagonal.  Class k is an irreducible
    block of size ``dims[k]`` occurring ``multiplicities[k]`` times; its
    copies occupy ``block_slices[k]`` in the new coordinates.
    """

    dims: tuple[int, ...]
    multiplicities: tuple[int, ...]
    basis_change: np.ndarray
    block_slices: tuple[tuple[slice, ...], ...]
    algebra_dim: int
    weights: tuple[Fraction, ...]
    residual: float = field(default=0.0)

    @property
    def dim(self) -> int:
        return self.basis_change.shape[0]

    def component(self, A: np.ndarray, k: int, copy: int = 0) -> np.ndarray:
        sl = self.block_slices[k][copy]
        V = self.basis_change[:, sl]
        return V.conj().T @ A @ V


def _algebra_basis(mats: Sequence[np.ndarray], tol: float = 1e-9) -> np.ndarray:
    """Orthonormal (Frobenius) basis of the unital algebra generated by ``mats``."""
    n = mats[0].shape[0]
    span = np.zeros((0, n * n), dtype=complex)

    def extend(span, cands):
        for X in cands:
            v = X.ravel()
            if span.shape[0]:
                # two Gram-Schmidt passes for numerical orthogonality
                v = v - span.T @ (span.conj() @ v)
                v = v - span.T @ (span.conj() @ v)
            nv = np.linalg.norm(v)
            if nv > tol * max(1.0, np.linalg.norm(X)):
                span = np.vstack([span, v / nv])
        return span

    span = extend(span, [np.eye(n, dtype=complex)] + list(mats))
    while True:
        before = span.shape[0]
        prods = [B.reshape(n, n) @ G for B in span for G in mats]
        span = extend(span, prods)
        if span.shape[0] == before:
            return span.reshape(-1, n, n)


def _commutant_basis(mats: Sequence[np.ndarray], tol: float = 1e-9) -> list[np.ndarray]:
    n = mats[0].shape[0]
    eye = np.eye(n)
    gram = np.zeros((n * n, n * n), dtype=complex)
    for A in mats:
        # row-major vec: vec(A X) = (A (x) I) vec X,  vec(X A) = (I (x) A^T) vec X
        C = np.kron(A, eye) - np.kron(eye, A.T)
        gram += C.conj().T @ C
    vals, vecs = np.linalg.eigh(gram)
    cut = tol * max(1.0, float(vals.max()))
    return [vecs[:, k].reshape(n, n) for k in range(n * n) if vals[k] <= cut]


def _clusters(vals: np.ndarray, tol: float) -> list[list[int]]:
    scale = max(1.0, float(np.abs(vals).max()))
    groups = [[0]]
    for k in range(1, len(vals)):
        if vals[k] - vals[k - 1] > tol * scale:
            groups.append([k])
        else:
            groups[-1].append(k)
    return groups


def block_decompose(generators: Sequence[OperatorMatrix], seed: int = 0) -> BlockDecomposition:
    """Numerically block-diagonalise the *-algebra generated by ``generators``.

    A generic Hermitian element of the commutant splits the space into
    irreducible invariant subspaces (its eigenspaces); subspaces carrying the
    same character on the algebra are copies of one block.
    """
    weights = generators[0].inner_weights
    mats = [g.standardized() for g in generators]
    mats = mats + [A.conj().T for A in mats]
    n = mats[0].shape[0]
    alg = _algebra_basis(mats)
    comm = _commutant_basis(mats)
    rng = np.random.default_rng(seed)
    last = "no attempt"
    for _ in range(RETRIES):
        H = np.zeros((n, n), dtype=complex)
        for Z in comm:
            a, b = rng.normal(size=2)
            H += a * (Z + Z.conj().T) + b * 1j * (Z - Z.conj().T)
        vals, vecs = np.linalg.eigh(H)
        groups = _clusters(vals, CLUSTER_TOL)
        spaces = [vecs[:, g] for g in groups]

        # invariance of each eigenspace
        resid = 0.0
        for V in spaces:
            proj_out = np.eye(n) - V @ V.conj().T
            for A in mats:
                resid = max(resid, float(np.linalg.norm(proj_out @ A @ V)))
        if resid > RESIDUAL_TOL:
            last = f"eigenspaces not invariant (residual {resid:.2e})"
            continue

        # group equivalent subspaces by their character on the algebra basis
        chars = [np.array([np.trace(V.conj().T @ B @ V) for B in alg]) for V in spaces]
        classes: list[list[int]] = []
        for i, V in enumerate(spaces):
            for cl in classes:
                j = cl[0]
                if spaces[j].shape[1] == V.shape[1] and np.allclose(chars[i], chars[j], atol=1e-6):
                    cl.append(i)
                    break
            else:
                classes.append([i])
        dims = tuple(spaces[cl[0]].shape[1] for cl in classes)
        if sum(d * d for d in dims) != alg.shape[0]:
            last = f"block dimensions {dims} do not account for algebra dimension {alg.shape[0]}"
            continue

        cols, slices, pos = [], [], 0
        for cl in classes:
            sl = []
            for i in cl:
                d = spaces[i].shape[1]
                cols.append(spaces[i])
                sl.append(slice(pos, pos + d))
                pos += d
            slices.append(tuple(sl))
        U = np.hstack(cols)
        return BlockDecomposition(
            dims=dims,
            multiplicities=tuple(len(cl) for cl in classes),
            basis_change=U,
            block_slices=tuple(slices),
            algebra_dim=int(alg.shape[0]),
            weights=tuple(weights),
            residual=resid,
        )
    raise DecompositionFailed(last)


def off_block_residual(d: BlockDecomposition, A: np.ndarray) -> float:
    """Largest entry of U^H A U outside the diagonal blocks."""
    B = d.basis_change.conj().T @ A @ d.basis_change
    mask = np.ones(B.shape, dtype=bool)
    for sls in d.block_slices:
        for sl in sls:
            mask[sl, sl] = False
    return float(np.abs(B[mask]).max()) if mask.any() else 0.0


# --- dual norms ---------------------------------------------------------------

def _std_left(h: HypergroupTable) -> list[np.ndarray]:
    return [L.standardized() for L in left_regular(h)]


def functional_densities(a, h: HypergroupTable, d: BlockDecomposition) -> list[np.ndarray]:
    """Block densities rho_k with sum_k tr(rho_k (L_s)_k) = a(s) for all s."""
    if d.dim != h.size or tuple(d.weights) != tuple(h.haar):
        raise DecompositionMismatch("decomposition was built for a different space")
    Ls = _std_left(h)
    if max(off_block_residual(d, A) for A in Ls) > RESIDUAL_TOL:
        raise DecompositionMismatch("decomposition does not block-diagonalise the left regular operators")
    comps = [[d.component(A, k) for k in range(len(d.dims))] for A in Ls]
    unknowns = sum(n * n for n in d.dims)
    if unknowns != h.size:
        raise DecompositionMismatch(f"blocks carry {unknowns} parameters for {h.size} points")
    # tr(rho X) = sum_{i,j} rho[i, j] X[j, i]
    M = np.zeros((h.size, unknowns), dtype=complex)
    for s in h.points:
        col = 0
        for k, n in enumerate(d.dims):
            M[s, col:col + n * n] = comps[s][k].T.ravel()
            col += n * n
    rhs = as_complex_array(np.asarray(a, dtype=object))
    sol, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    if np.abs(M @ sol - rhs).max() > 1e-8 * max(1.0, float(np.abs(rhs).max())):
        raise DecompositionMismatch("functional is not representable on the block algebra")
    out, col = [], 0
    for n in d.dims:
        out.append(sol[col:col + n * n].reshape(n, n))
        col += n * n
    return out


def dual_norm(a, h: HypergroupTable, d: BlockDecomposition | None = None) -> float:
    """Norm of lambda(f m~) -> sum_s a(s) f(s) m~(s) on the reduced C*-algebra.

    On the basis, this functional sends L_s to a(s); its norm is the sum of
    the trace norms of its block densities.
    """
    if d is None:
        d = block_decompose(left_regular(h))
    rhos = functional_densities(a, h, d)
    return float(sum(np.linalg.svd(r, compute_uv=False).sum() for r in rhos))


def sampled_dual_norm(a, h: HypergroupTable, samples: int = 10_000, seed: int = 0) -> float:
    """Lower bound for the dual norm by searching unitaries of the algebra.

    The unit ball of a finite-dimensional C*-algebra is the convex hull of its
    unitaries, and every unitary is exp(iH) with H Hermitian in the algebra.
    Half the budget goes to random unitaries, the rest to a shrinking-step
    random walk from the best one.  Only the generators are used, never a
    block decomposition.
    """
    Ls = _std_left(h)
    n = h.size
    basis = np.array([A.ravel() for A in Ls]).T  # vec(X) = basis @ coords
    pinv = np.linalg.pinv(basis)
    av = as_complex_array(np.asarray(a, dtype=object))
    herm = []
    for A in Ls:
        herm.append(A + A.conj().T)
        herm.append(1j * (A - A.conj().T))
    rng = np.random.default_rng(seed)

    def expi(H):
        vals, vecs = np.linalg.eigh(H)
        return (vecs * np.exp(1j * vals)) @ vecs.conj().T

    def value(U):
        return abs(av @ (pinv @ U.ravel()))

    def random_herm(scale):
        x = rng.normal(size=len(herm)) * scale
        H = sum(c * B for c, B in zip(x, herm))
        return (H + H.conj().T) / 2

    best_u, best = np.eye(n, dtype=complex), value(np.eye(n, dtype=complex))
    first = samples // 2
    for _ in range(first):
        U = expi(random_herm(np.pi))
        v = value(U)
        if v > best:
            best, best_u = v, U
    step = 0.5
    for _ in range(samples - first):
        U = expi(random_herm(step)) @ best_u
        v = value(U)
        if v > best:
            best, best_u = v, U
        else:
            step = max(step * 0.995, 1e-4)
    return float(best)


# --- submultiplicativity of the Fourier space ---------------------------------------

def positive_type(f, h: HypergroupTable) -> np.ndarray:
    """u = f * f-dagger."""
    return l1_convolve(f, l1_dagger(f, h), h)


def l2_norm_sq(f, h: HypergroupTable) -> Fraction:
    return sum(h.haar[s] * f[s] * f[s] for s in h.points)


def span_dimension(vectors: Sequence[np.ndarray], tol: float = 1e-9) -> int:
    M = np.array([as_complex_array(v) for v in vectors])
    if not len(M):
        return 0
    sv = np.linalg.svd(M, compute_uv=False)
    return int((sv > tol * max(1.0, sv[0])).sum())


def fourier_submultiplicativity_report(
    h: HypergroupTable,
    samples: int = 256,
    seed: int = 0,
    tol: float = PSD_TOL,
    decomposition: BlockDecomposition | None = None,
) -> Report:
    """Sample u = f*f-dagger, v = g*g-dagger and test the product u v.

    Checks that u v is positive definite and that
    ||u v|| <= ||u|| ||v|| + 1e-9 in the reduced dual norm.  Also records the
    bound ||u|| <= ||f||_2^2 and the observed ratio, and the dimension of the
    span of the sampled u.
    """
    d = decomposition or block_decompose(left_regular(h), seed=seed)
    rng = np.random.default_rng(seed)
    worst_ratio, worst_at = 0.0, None
    gns_ratio_max = 0.0
    pd_fail = submult_fail = gns_fail = None
    us = []
    for k in range(samples):
        f = random_rational_vector(rng, h.size)
        g = random_rational_vector(rng, h.size)
        u, v = positive_type(f, h), positive_type(g, h)
        us.append(u)
        uv = u * v
        if not positive_definite_check(uv, h, tol).is_pd and pd_fail is None:
            pd_fail = {"sample": k}
        nu = dual_norm(u, h, d)
        nv = dual_norm(v, h, d)
        nuv = dual_norm(uv, h, d)
        if nuv > nu * nv + 1e-9 and submult_fail is None:
            submult_fail = {"sample": k, "norm_uv": nuv, "norm_u_norm_v": nu * nv}
        ratio = nuv / (nu * nv) if nu * nv > 0 else 0.0
        if ratio > worst_ratio:
            worst_ratio, worst_at = ratio, k
        l2 = float(l2_norm_sq(f, h))
        if nu > l2 + 1e-9 and gns_fail is None:
            gns_fail = {"sample": k, "norm_u": nu, "l2_sq": l2}
        if l2 > 0:
            gns_ratio_max = max(gns_ratio_max, nu / l2)
    checks = {
        "product_positive_definite": Check(pd_fail is None, pd_fail),
        "submultiplicative": Check(submult_fail is None, submult_fail),
        "gns_bound": Check(gns_fail is None, gns_fail),
    }
    meta = {
        "samples": samples,
        "seed": seed,
        "worst_submult_ratio": worst_ratio,
        "worst_sample": worst_at,
        "max_norm_over_l2_sq": gns_ratio_max,
        "span_dim_positive_type": span_dimension(us),
        "size": h.size,
    }
    return Report("fourier_submultiplicativity", checks, meta)
