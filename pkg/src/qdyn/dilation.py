"""Unitary-universe dilation and the swap trick for correlated initial states.

Subsystems are ordered ``S ⊗ E`` for the plain model and ``S ⊗ E ⊗ A`` for
the swapped model, where ``A`` is an ancillary copy of the system space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from qdyn.channel import KrausChannel, apply
from qdyn.errors import DimensionMismatchError
from qdyn.linalg import (
    check_unitary,
    dagger,
    expm_antihermitian,
    hermitian_eig,
    kron,
    partial_trace,
    permutation_operator,
    permute_subsystems,
)
from qdyn.states import check_density, maximally_entangled, projector

#: Environment eigenvalues below this are discarded before forming Kraus operators.
EIGEN_CUTOFF = 1e-12

PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class UniverseModel:
    """System ``S`` and environment ``E`` evolving under a joint unitary.

    Exactly one of ``rho_se`` (correlated start) or the pair
    ``rho_s, rho_e`` (product start) is set.
    """

    dim_s: int
    dim_e: int
    u: np.ndarray
    rho_s: np.ndarray | None = None
    rho_e: np.ndarray | None = None
    rho_se: np.ndarray | None = None

    def __post_init__(self):
        u = check_unitary(self.u, "U")
        if u.shape[0] != self.dim_s * self.dim_e:
            raise DimensionMismatchError(f"U has size {u.shape[0]}, expected {self.dim_s * self.dim_e}")
        object.__setattr__(self, "u", u)
        product = self.rho_s is not None or self.rho_e is not None
        if product == (self.rho_se is not None):
            raise ValueError("give either rho_s and rho_e, or rho_se")
        if product:
            if self.rho_s is None or self.rho_e is None:
                raise ValueError("product initial condition needs both rho_s and rho_e")
            object.__setattr__(self, "rho_s", _state_of_dim(self.rho_s, self.dim_s, "rho_s"))
            object.__setattr__(self, "rho_e", _state_of_dim(self.rho_e, self.dim_e, "rho_e"))
        else:
            object.__setattr__(self, "rho_se", _state_of_dim(self.rho_se, self.dim_s * self.dim_e, "rho_se"))

    @property
    def is_product(self) -> bool:
        return self.rho_se is None

    def initial_state(self) -> np.ndarray:
        return kron(self.rho_s, self.rho_e) if self.is_product else self.rho_se

    def evolve_system(self) -> np.ndarray:
        """``tr_E(U rho_SE U^dag)``."""
        out = self.u @ self.initial_state() @ dagger(self.u)
        return partial_trace(out, (self.dim_s, self.dim_e), [0])


def _state_of_dim(rho, d: int, name: str) -> np.ndarray:
    r = check_density(rho)
    if r.shape[0] != d:
        raise DimensionMismatchError(f"{name} has dimension {r.shape[0]}, expected {d}")
    return r


def reduced_state(rho, dims, keep) -> np.ndarray:
    """Validated reduced density matrix of the factors in ``keep`` (0-based)."""
    return check_density(partial_trace(check_density(rho), dims, keep))


def _environment_kraus(u: np.ndarray, dim_s: int, env_state: np.ndarray) -> list[np.ndarray]:
    """``sqrt(l_i) <e_j| U |e_i>`` over eigenpairs of ``env_state``.

    ``U`` acts on ``S ⊗ env``; ``<e_j| U |e_i>`` is the partial matrix
    element, an operator on ``S``.
    """
    lam, vecs = hermitian_eig(env_state)
    d_env = env_state.shape[0]
    u4 = u.reshape(dim_s, d_env, dim_s, d_env)
    ops = []
    for i, li in enumerate(lam):
        if li < EIGEN_CUTOFF:
            continue
        # K_ij[a, b] = sum_{x,y} conj(e_j[x]) U[(a,x),(b,y)] e_i[y]
        blocks = np.einsum("xj,axby,y->jab", vecs.conj(), u4, vecs[:, i])
        ops.extend(np.sqrt(li) * blocks)
    return ops


def kraus_from_dilation(model: UniverseModel) -> KrausChannel:
    """Kraus set ``K_ij = sqrt(l_i) <e^j|U|e^i>`` of a product-start model."""
    if not model.is_product:
        raise ValueError("kraus_from_dilation needs a product initial state; use swap_convert")
    return KrausChannel(_environment_kraus(model.u, model.dim_s, model.rho_e))


def swap_gate(d: int) -> np.ndarray:
    """``sum_ij |ij><ji|`` on ``C^d ⊗ C^d``."""
    if d < 2:
        raise ValueError("dimension must be at least 2")
    return permutation_operator((d, d), (1, 0))


@dataclass(frozen=True, eq=False)
class SwappedUniverse:
    """Swapped model on ``S ⊗ E ⊗ A``.

    ``sigma_ea`` is ``rho_SE`` with its system factor relocated to ``A``,
    stored in ``E ⊗ A`` order, and ``w = (U_SE ⊗ 1_A)(V_SA ⊗ 1_E)``.
    """

    n: int
    dim_e: int
    sigma_s: np.ndarray
    sigma_ea: np.ndarray
    w: np.ndarray

    def initial_state(self) -> np.ndarray:
        return kron(self.sigma_s, self.sigma_ea)


def swapped_universe(rho_se, dims, u_se) -> SwappedUniverse:
    n, dim_e = (int(x) for x in dims)
    rho = check_density(rho_se)
    if rho.shape[0] != n * dim_e:
        raise DimensionMismatchError(f"rho_SE has dimension {rho.shape[0]}, expected {n}*{dim_e}")
    u = check_unitary(u_se, "U_SE")
    if u.shape[0] != n * dim_e:
        raise DimensionMismatchError(f"U_SE has size {u.shape[0]}, expected {n}*{dim_e}")
    sigma_s = partial_trace(rho, (n, dim_e), [0])
    sigma_ea = permute_subsystems(rho, (n, dim_e), (1, 0))
    v_sa = permutation_operator((n, dim_e, n), (2, 1, 0))
    w = kron(u, np.eye(n)) @ v_sa
    return SwappedUniverse(n, dim_e, sigma_s, sigma_ea, w)


def swap_convert(rho_se, dims, u_se) -> tuple[np.ndarray, KrausChannel]:
    """Turn correlated ``S``-``E`` dynamics into a CP map on ``tr_E(rho_SE)``.

    Returns ``(sigma_s, channel)`` where ``channel`` has Kraus operators
    ``sqrt(p_i) <psi_j| W |psi_i>`` over the eigenbasis of ``sigma_EA`` and
    ``channel(sigma_s) = tr_E(U rho_SE U^dag)``.
    """
    sw = swapped_universe(rho_se, dims, u_se)
    return sw.sigma_s, KrausChannel(_environment_kraus(sw.w, sw.n, sw.sigma_ea))


def swap_residual(rho_se, dims, u_se, ch: KrausChannel | None = None) -> float:
    """``|| ch(tr_E rho_SE) - tr_E(U rho_SE U^dag) ||_F``."""
    if ch is None:
        sigma_s, ch = swap_convert(rho_se, dims, u_se)
    else:
        sigma_s = partial_trace(rho_se, dims, [0])
    u = np.asarray(u_se, dtype=np.complex128)
    target = partial_trace(u @ np.asarray(rho_se) @ dagger(u), dims, [0])
    return float(np.linalg.norm(apply(ch, sigma_s) - target))


def depolarization_kraus(theta: float) -> KrausChannel:
    """The four-operator depolarising set ``e^{-i theta} (1, X, iY, Z) / 2``."""
    ph = np.exp(-1j * theta) / 2
    return KrausChannel([ph * np.eye(2), ph * PAULI_X, 1j * ph * PAULI_Y, ph * PAULI_Z])


def depolarizing_example(theta: float) -> tuple[UniverseModel, KrausChannel]:
    """Bell-correlated qubit pair under ``exp(-i theta X⊗X)`` and its expected channel."""
    bell = projector(maximally_entangled(2))
    u = expm_antihermitian(kron(PAULI_X, PAULI_X), theta)
    return UniverseModel(2, 2, u, rho_se=bell), depolarization_kraus(theta)
