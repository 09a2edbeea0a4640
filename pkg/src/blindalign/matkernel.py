"""
Dense complex linear algebra and seeded sampling used throughout the package.

Matrices are plain :class:`numpy.ndarray` objects (``complex128``); the
kernel validates them on entry instead of wrapping them in a custom type.
Rank computations understand :mod:`scipy.sparse` inputs and exploit
direct-sum (block-diagonal up to permutation) structure, which is what
makes rank verification of the larger supersymbols affordable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import LinearOperator, eigsh, splu

from .errors import DegenerateSubspace, InvalidArgument, InvalidMatrix

DEFAULT_REL_TOL = 1e-8

# Dense SVD is used outright below this many entries.
_DENSE_ENTRY_LIMIT = 4096
# Gram-based certificates are trusted only when the rank threshold sits well
# above the sqrt(eps) resolution floor of squared singular values.
_GRAM_RESOLUTION = 1e-6


def as_complex_matrix(A) -> np.ndarray:
    """Return `A` as a 2-D ``complex128`` array, rejecting non-finite entries."""
    if sp.issparse(A):
        A = A.toarray()
    arr = np.asarray(A, dtype=np.complex128)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise InvalidMatrix(f"expected a 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidMatrix("matrix has non-finite entries")
    return arr


@dataclass(frozen=True)
class RankReport:
    """Outcome of a numeric rank computation."""

    numeric_rank: int
    singular_values: np.ndarray
    threshold: float


@dataclass(frozen=True)
class RankCertificate:
    """Extreme singular values of a matrix and the resulting full-rank verdict."""

    full_rank: bool
    sigma_max: float
    sigma_min: float
    threshold: float


def _threshold(rel_tol: float, shape: tuple[int, int], sigma_max: float) -> float:
    return float(rel_tol * max(shape) * sigma_max)


def _check_rel_tol(rel_tol: float) -> None:
    if not 0.0 < rel_tol < 1.0:
        raise InvalidArgument(f"rel_tol must lie in (0, 1), got {rel_tol}")


def _local_index(lab: np.ndarray, n_comp: int) -> tuple[np.ndarray, np.ndarray]:
    """Position of every vertex among the vertices of its component, and component sizes."""
    order = np.argsort(lab, kind="stable")
    counts = np.bincount(lab, minlength=n_comp)
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    pos = np.empty_like(order)
    pos[order] = np.arange(lab.size) - np.repeat(starts, counts)
    return pos, counts


def _component_singular_values(A: sp.coo_array) -> np.ndarray:
    """Singular values of a sparse matrix via its direct-sum decomposition.

    Rows and columns are vertices of a bipartite graph with an edge per
    structural nonzero. Each connected component is an independent block,
    so the singular values of the whole matrix are the union of the blocks'
    singular values, padded with zeros. Blocks of equal shape are
    decomposed together as one stacked SVD.
    """
    rows, cols = A.shape
    r, c = A.row, A.col
    graph = sp.coo_array(
        (np.ones(r.size, dtype=np.int8), (r, c + rows)), shape=(rows + cols,) * 2
    )
    n_comp, labels = connected_components(graph, directed=False)
    row_lab, col_lab = labels[:rows], labels[rows:]
    row_pos, n_rows = _local_index(row_lab, n_comp)
    col_pos, n_cols = _local_index(col_lab, n_comp)

    entry_lab = row_lab[r]
    used = np.unique(entry_lab)
    shapes = np.stack([n_rows[used], n_cols[used]], axis=1)
    uniq, group = np.unique(shapes, axis=0, return_inverse=True)
    group = np.ravel(group)
    comp_group = np.full(n_comp, -1)
    comp_group[used] = group
    slot = np.zeros(n_comp, dtype=np.int64)
    values = []
    for g, (nr, nc) in enumerate(uniq):
        members = used[group == g]
        slot[members] = np.arange(members.size)
        stack = np.zeros((members.size, nr, nc), dtype=np.complex128)
        sel = comp_group[entry_lab] == g
        stack[slot[entry_lab[sel]], row_pos[r[sel]], col_pos[c[sel]]] = A.data[sel]
        values.append(np.linalg.svd(stack, compute_uv=False).ravel())

    sv = np.concatenate(values) if values else np.zeros(0)
    out = np.zeros(min(rows, cols))
    sv = np.sort(sv)[::-1][: out.size]
    out[: sv.size] = sv
    return out


def numeric_rank(A, rel_tol: float = DEFAULT_REL_TOL) -> RankReport:
    """
    Numeric rank from singular values.

    A singular value counts towards the rank when it is strictly above
    ``rel_tol * max(rows, cols) * sigma_max``.

    Parameters
    ----------
    A : array_like or scipy.sparse matrix
        Nonempty matrix with finite entries.
    rel_tol : float
        Relative threshold in (0, 1).

    Returns
    -------
    RankReport
    """
    _check_rel_tol(rel_tol)
    if sp.issparse(A):
        coo = sp.coo_array(A, dtype=np.complex128)
        if coo.shape[0] == 0 or coo.shape[1] == 0:
            raise InvalidArgument("matrix must be nonempty")
        if not np.all(np.isfinite(coo.data)):
            raise InvalidMatrix("matrix has non-finite entries")
        coo.eliminate_zeros()
        if coo.shape[0] * coo.shape[1] <= _DENSE_ENTRY_LIMIT:
            sv = np.linalg.svd(coo.toarray(), compute_uv=False)
        else:
            sv = _component_singular_values(coo)
        shape = coo.shape
    else:
        arr = as_complex_matrix(A)
        if arr.size == 0:
            raise InvalidArgument("matrix must be nonempty")
        shape = arr.shape
        if arr.size <= _DENSE_ENTRY_LIMIT:
            sv = np.linalg.svd(arr, compute_uv=False)
        else:
            sv = _component_singular_values(sp.coo_array(arr))
    sigma_max = float(sv[0]) if sv.size else 0.0
    thr = _threshold(rel_tol, shape, sigma_max)
    rank = int(np.count_nonzero(sv > thr)) if sigma_max > 0 else 0
    return RankReport(numeric_rank=rank, singular_values=sv, threshold=thr)


def certify_full_rank(A, rel_tol: float = DEFAULT_REL_TOL) -> RankCertificate:
    """
    Decide whether `A` has numeric rank ``min(rows, cols)`` without a full SVD.

    The extreme eigenvalues of the sparse Gram matrix (the smaller of
    ``A A^H`` and ``A^H A``) are found with Lanczos iterations, the smallest
    one by shift-invert. The verdict agrees with :func:`numeric_rank` as long
    as the threshold is far above ``sqrt(eps) * sigma_max``; otherwise the
    dense path is used.
    """
    _check_rel_tol(rel_tol)
    M = sp.csr_array(A, dtype=np.complex128)
    rows, cols = M.shape
    if rows == 0 or cols == 0:
        raise InvalidArgument("matrix must be nonempty")
    n = min(rows, cols)
    if rel_tol * max(rows, cols) < _GRAM_RESOLUTION or n <= 64:
        rep = numeric_rank(M, rel_tol)
        sv = rep.singular_values
        return RankCertificate(rep.numeric_rank == n, float(sv[0]), float(sv[-1]),
                               rep.threshold)

    gram = (M @ M.conj().T) if rows <= cols else (M.conj().T @ M)
    gram = sp.csc_array(gram)
    v0 = np.ones(n, dtype=np.complex128)
    lam_max = float(eigsh(gram, k=1, which="LA", v0=v0, return_eigenvectors=False)[0])
    if lam_max <= 0.0:
        return RankCertificate(False, 0.0, 0.0, 0.0)
    shift = -1e-10 * lam_max
    # The Gram matrix is Hermitian, so a symmetric fill-reducing ordering
    # makes the shifted factorisation far cheaper than the default one.
    lu = splu(sp.csc_array(gram - shift * sp.identity(n, format="csc")),
              permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
              options={"SymmetricMode": True})
    op_inv = LinearOperator((n, n), matvec=lu.solve, dtype=np.complex128)
    lam_min = float(eigsh(gram, k=1, sigma=shift, which="LM", v0=v0, OPinv=op_inv,
                          return_eigenvectors=False)[0])
    sigma_max = np.sqrt(lam_max)
    sigma_min = np.sqrt(max(lam_min, 0.0))
    thr = _threshold(rel_tol, (rows, cols), sigma_max)
    return RankCertificate(bool(sigma_min > thr), float(sigma_max), float(sigma_min), thr)


def log_det_hermitian_plus_identity(A, scale: float = 1.0, tol: float = 1e-10):
    """
    ``log2 det(I + scale * A)`` for Hermitian positive semidefinite `A`.

    Computed from a Cholesky factor, so the result is real and nonnegative.
    `A` may be a stack of matrices with shape ``(..., n, n)``, in which case
    an array of values is returned.
    """
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise InvalidMatrix(f"expected square matrices, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidMatrix("matrix has non-finite entries")
    if scale < 0:
        raise InvalidArgument(f"scale must be nonnegative, got {scale}")
    AH = np.conj(np.swapaxes(A, -1, -2))
    mag = max(1.0, float(np.max(np.abs(A), initial=0.0)))
    if np.max(np.abs(A - AH), initial=0.0) > tol * mag:
        raise InvalidMatrix("matrix is not Hermitian")
    n = A.shape[-1]
    S = np.eye(n) + scale * 0.5 * (A + AH)
    L = np.linalg.cholesky(S)
    diag = np.real(np.diagonal(L, axis1=-2, axis2=-1))
    out = 2.0 * np.sum(np.log2(diag), axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def orthonormal_complement(V, rel_tol: float = DEFAULT_REL_TOL) -> np.ndarray:
    """
    Rows spanning the orthogonal complement of the column space of `V`.

    Returns `Q` with ``rows(V) - cols(V)`` orthonormal rows and ``Q @ V = 0``.
    Raises :class:`DegenerateSubspace` if `V` is not of full column rank.
    """
    if np.ndim(V) == 1:
        V = np.reshape(V, (-1, 1))
    V = as_complex_matrix(V)
    rows, cols = V.shape
    if rows < cols:
        raise InvalidArgument(f"need rows >= cols, got shape {V.shape}")
    U, s, _ = np.linalg.svd(V, full_matrices=True)
    thr = _threshold(rel_tol, V.shape, float(s[0]) if s.size else 0.0)
    if s.size == 0 or s[0] == 0 or np.count_nonzero(s > thr) < cols:
        raise DegenerateSubspace("V does not have full column rank")
    return U[:, cols:].conj().T


def sample_gaussian_matrix(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """I.i.d. circularly-symmetric complex Gaussian entries with unit variance."""
    z = rng.standard_normal((rows, cols, 2))
    return (z[..., 0] + 1j * z[..., 1]) * np.sqrt(0.5)


def child_rng(seed: int, index: int) -> np.random.Generator:
    """Generator for work item `index` derived from a master `seed`.

    The stream depends only on ``(seed, index)``, never on the order in
    which items are processed.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.PCG64(ss))
