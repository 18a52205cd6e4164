"""Dense complex linear algebra kernels.

Operators are plain ``numpy`` arrays of dtype ``complex128``. Composite
systems follow the left-to-right ``kron`` ordering: for factor dimensions
``(d1, ..., dk)`` the basis index is ``i1*d2*...*dk + ... + ik`` (big-endian).
"""

from __future__ import annotations

from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from qdyn.errors import DimensionMismatchError, NotHermitianError, NotUnitaryError

#: Eigen-decomposition / unitarity tolerance.
EIG_TOL = 1e-10
#: Default tolerance for positive-semidefiniteness checks.
PSD_TOL = 1e-9


def as_matrix(m) -> np.ndarray:
    """Coerce ``m`` to a finite 2-D complex array."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise DimensionMismatchError(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains NaN or Inf entries")
    return a


def as_square(m) -> np.ndarray:
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {a.shape}")
    return a


def herm_tol(m: np.ndarray) -> float:
    """Hermiticity tolerance ``1e-10 * max(1, ||m||_F)``."""
    return 1e-10 * max(1.0, float(np.linalg.norm(m)))


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.transpose(m))


def is_hermitian(m, tol: float | None = None) -> bool:
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        return False
    tol = herm_tol(a) if tol is None else tol
    return bool(np.max(np.abs(a - dagger(a)), initial=0.0) <= tol)


def check_hermitian(m, name: str = "matrix") -> np.ndarray:
    """Return ``m`` as a square array, raising if it is not Hermitian."""
    a = as_square(m)
    dev = float(np.max(np.abs(a - dagger(a)), initial=0.0))
    if dev > herm_tol(a):
        raise NotHermitianError(f"{name} is not Hermitian (max |m - m^dag| = {dev:.3e})")
    return a


def is_unitary(u, tol: float = EIG_TOL) -> bool:
    a = as_matrix(u)
    if a.shape[0] != a.shape[1]:
        return False
    return bool(np.max(np.abs(dagger(a) @ a - np.eye(a.shape[0]))) <= tol)


def check_unitary(u, name: str = "matrix") -> np.ndarray:
    a = as_square(u)
    dev = float(np.max(np.abs(dagger(a) @ a - np.eye(a.shape[0]))))
    if dev > EIG_TOL:
        raise NotUnitaryError(f"{name} is not unitary (max |U^dag U - 1| = {dev:.3e})")
    return a


def kron(*ops) -> np.ndarray:
    """Kronecker product of one or more matrices, left to right."""
    if not ops:
        raise ValueError("kron needs at least one operand")
    return reduce(np.kron, (np.asarray(o, dtype=np.complex128) for o in ops))


def _check_dims(m: np.ndarray, dims: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims):
        raise DimensionMismatchError(f"subsystem dimensions must be positive, got {dims}")
    if int(np.prod(dims)) != m.shape[0]:
        raise DimensionMismatchError(
            f"product of dims {dims} = {int(np.prod(dims))} does not match matrix size {m.shape[0]}"
        )
    return dims


def partial_trace(m, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every factor not listed in ``keep``.

    ``keep`` holds 0-based factor indices; the kept factors stay in their
    original order. Keeping nothing returns the ``1x1`` matrix ``[[tr m]]``.
    """
    a = as_square(m)
    dims = _check_dims(a, dims)
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise DimensionMismatchError(f"keep indices {keep} out of range for {n} factors")
    t = a.reshape(dims + dims)
    # einsum labels: row factor k -> letter k, column factor k -> letter n+k
    # (traced factors share the row label)
    letters = [chr(ord("a") + i) for i in range(2 * n)]
    row = letters[:n]
    col = [letters[n + k] if k in keep else letters[k] for k in range(n)]
    out = [row[k] for k in keep] + [col[k] for k in keep]
    res = np.einsum("".join(row + col) + "->" + "".join(out), t)
    dk = int(np.prod([dims[k] for k in keep])) if keep else 1
    return res.reshape(dk, dk)


def permute_subsystems(m, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors of a square operator.

    Output factor ``k`` is input factor ``perm[k]``.
    """
    a = as_square(m)
    dims = _check_dims(a, dims)
    n = len(dims)
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(n)):
        raise ValueError(f"{perm} is not a permutation of {n} factors")
    t = a.reshape(dims + dims).transpose(perm + [n + p for p in perm])
    return t.reshape(a.shape)


def permutation_operator(dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Unitary ``P`` with ``P (x_0 ⊗ ... ⊗ x_{n-1}) = x_perm[0] ⊗ ... ⊗ x_perm[n-1]``."""
    dims = tuple(int(d) for d in dims)
    total = int(np.prod(dims))
    src = np.arange(total).reshape(dims)
    dst = np.transpose(src, perm).reshape(-1)
    p = np.zeros((total, total), dtype=np.complex128)
    p[np.arange(total), dst] = 1.0
    return p


def hermitian_eig(h) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvector columns of ``h``."""
    a = check_hermitian(h)
    w, v = np.linalg.eigh((a + dagger(a)) / 2)
    return w, v


def expm_antihermitian(h, t: float) -> np.ndarray:
    """``exp(-i t h)`` for Hermitian ``h``."""
    w, v = hermitian_eig(h)
    return (v * np.exp(-1j * t * w)) @ dagger(v)


def is_psd(m, tol: float = PSD_TOL) -> bool:
    """True iff the smallest eigenvalue of Hermitian ``m`` is at least ``-tol``."""
    w, _ = hermitian_eig(m)
    return bool(w[0] >= -tol)


def frob_dist(a, b) -> float:
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))
