"""Density matrices, operator bases and Bloch coherence vectors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from qdyn.errors import DimensionMismatchError, NonRealError, NotStateError
from qdyn.linalg import PSD_TOL, as_square, check_hermitian, dagger, herm_tol

TRACE_TOL = 1e-10


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator keyed by ``seed`` only."""
    return np.random.Generator(np.random.Philox(seed))


def check_density(rho, tol: float = PSD_TOL) -> np.ndarray:
    """Validate a density matrix and return it as a complex array.

    Raises :class:`NotStateError` unless ``rho`` is Hermitian, has unit trace
    and no eigenvalue below ``-tol``.
    """
    a = as_square(rho)
    dev = float(np.max(np.abs(a - dagger(a))))
    if dev > herm_tol(a):
        raise NotStateError(f"state is not Hermitian (deviation {dev:.3e})")
    tr = np.trace(a)
    if abs(tr - 1) > TRACE_TOL:
        raise NotStateError(f"state trace is {tr.real:.12g}, expected 1")
    lo = float(np.linalg.eigvalsh((a + dagger(a)) / 2)[0])
    if lo < -tol:
        raise NotStateError(f"state has negative eigenvalue {lo:.3e}")
    return a


def is_density(rho, tol: float = PSD_TOL) -> bool:
    try:
        check_density(rho, tol)
    except (NotStateError, DimensionMismatchError):
        return False
    return True


def ket(*amplitudes) -> np.ndarray:
    return np.asarray(amplitudes, dtype=np.complex128)


def projector(psi) -> np.ndarray:
    """``|psi><psi|`` for a (not necessarily normalised) vector."""
    v = np.asarray(psi, dtype=np.complex128).reshape(-1)
    return np.outer(v, v.conj())


def pure_state(psi) -> np.ndarray:
    v = np.asarray(psi, dtype=np.complex128).reshape(-1)
    return projector(v / np.linalg.norm(v))


def maximally_mixed(d: int) -> np.ndarray:
    return np.eye(d, dtype=np.complex128) / d


def maximally_entangled(d: int) -> np.ndarray:
    """The vector ``sum_i |ii> / sqrt(d)``."""
    if d < 2:
        raise ValueError("dimension must be at least 2")
    v = np.zeros(d * d, dtype=np.complex128)
    v[np.arange(d) * (d + 1)] = 1 / np.sqrt(d)
    return v


def random_unitary(d: int, seed: int) -> np.ndarray:
    """Haar-distributed unitary from the QR decomposition of a Ginibre matrix."""
    rng = make_rng(seed)
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_density(d: int, rank: int | None = None, seed: int = 0) -> np.ndarray:
    """Random density matrix of the given rank (full rank by default)."""
    rank = d if rank is None else rank
    if not 1 <= rank <= d:
        raise ValueError(f"rank must lie in [1, {d}], got {rank}")
    rng = make_rng(seed)
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = g @ dagger(g)
    rho = (rho + dagger(rho)) / 2
    return rho / np.trace(rho).real


def random_hermitian(d: int, seed: int) -> np.ndarray:
    rng = make_rng(seed)
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (g + dagger(g)) / 2


def random_ket(d: int, seed: int) -> np.ndarray:
    rng = make_rng(seed)
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


@dataclass(frozen=True, eq=False)
class OperatorBasis:
    """Hermitian orthonormal operator basis ``F_0 .. F_{d^2-1}``.

    ``F_0 = 1/sqrt(d)``; the remaining elements are traceless.
    """

    dim: int
    elements: np.ndarray  # shape (d*d, d, d)

    def __len__(self) -> int:
        return len(self.elements)

    def __getitem__(self, i: int) -> np.ndarray:
        return self.elements[i]

    def coefficients(self, m) -> np.ndarray:
        """``tr(F_i m)`` for every basis element (complex in general)."""
        a = np.asarray(m, dtype=np.complex128)
        # tr(F_i m) = sum_ab F_i[a, b] m[b, a]
        return np.einsum("iab,ba->i", self.elements, a)

    def gram(self) -> np.ndarray:
        return np.einsum("iab,jab->ij", self.elements.conj(), self.elements)


def gell_mann_basis(d: int) -> OperatorBasis:
    """Generalised Gell-Mann matrices normalised to ``tr(F_i F_j) = delta_ij``.

    Ordering after the identity: symmetric off-diagonal, antisymmetric
    off-diagonal (both over ``j < k``), then diagonal. For ``d = 2`` this gives
    ``(1, X, Y, Z) / sqrt(2)``.
    """
    if d < 2:
        raise ValueError("dimension must be at least 2")
    els = [np.eye(d, dtype=np.complex128) / np.sqrt(d)]
    pairs = [(j, k) for j in range(d) for k in range(j + 1, d)]
    for j, k in pairs:
        m = np.zeros((d, d), dtype=np.complex128)
        m[j, k] = m[k, j] = 1 / np.sqrt(2)
        els.append(m)
    for j, k in pairs:
        m = np.zeros((d, d), dtype=np.complex128)
        m[j, k] = -1j / np.sqrt(2)
        m[k, j] = 1j / np.sqrt(2)
        els.append(m)
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1
        diag[l] = -l
        els.append(np.diag(diag / np.sqrt(l * (l + 1))).astype(np.complex128))
    return OperatorBasis(d, np.array(els))


def _check_basis_dim(basis: OperatorBasis, d: int) -> None:
    if basis.dim != d:
        raise DimensionMismatchError(f"basis dimension {basis.dim} does not match operator dimension {d}")


def bloch_vector(rho, basis: OperatorBasis) -> np.ndarray:
    """Coherence vector ``f`` with ``rho = (1 + sum_i f_i F_i) / d``.

    Each component is ``f_i = d * tr(F_i rho)``, so ``tr(F_i rho) = f_i / d``.
    """
    a = check_density(rho)
    _check_basis_dim(basis, a.shape[0])
    return basis.dim * basis.coefficients(a)[1:].real


def operator_from_bloch(f, basis: OperatorBasis) -> np.ndarray:
    """``(1 + sum_i f_i F_i) / d`` without any positivity check."""
    f = np.asarray(f, dtype=float).reshape(-1)
    d = basis.dim
    if f.size != d * d - 1:
        raise DimensionMismatchError(f"Bloch vector length {f.size} does not match d^2-1 = {d * d - 1}")
    return (np.eye(d) + np.einsum("i,iab->ab", f, basis.elements[1:])) / d


def state_from_bloch(f, basis: OperatorBasis, tol: float = PSD_TOL) -> np.ndarray:
    """Inverse of :func:`bloch_vector`; rejects vectors outside the state set."""
    rho = operator_from_bloch(f, basis)
    lo = float(np.linalg.eigvalsh(rho)[0])
    if lo < -tol:
        raise NotStateError(f"Bloch vector does not describe a state (min eigenvalue {lo:.3e})")
    return rho


def expectation(rho, a) -> float:
    """``tr(a rho)`` for a density matrix and a Hermitian observable."""
    r = as_square(rho)
    o = check_hermitian(a, "observable")
    if r.shape != o.shape:
        raise DimensionMismatchError(f"state {r.shape} and observable {o.shape} differ in shape")
    val = np.trace(o @ r)
    if abs(val.imag) >= 1e-8:
        raise NonRealError(f"expectation has imaginary part {val.imag:.3e}")
    return float(val.real)
