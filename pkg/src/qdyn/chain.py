"""Quantum measurement chains and measurement transfer matrices.

A chain applies generalised measurements ``M^(1), M^(2), ...`` in sequence,
with no free evolution in between. The transfer matrix between steps ``k-1``
and ``k`` has entries

    m_ji = tr(M_i^dag N_j^dag N_j M_i rho) / tr(M_i^dag M_i rho)

where ``{M_i}`` is step ``k-1``, ``{N_j}`` is step ``k`` and ``rho`` is the
state *before* step ``k-1`` (the context state). It maps branch
probabilities forward: ``P_k = Upsilon_{k,k-1} P_{k-1}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from qdyn.channel import KrausChannel
from qdyn.errors import DimensionMismatchError
from qdyn.linalg import as_square, dagger
from qdyn.states import check_density, make_rng, projector, random_density

COMPLETE_TOL = 1e-10
BOUND_TOL = 1e-9
#: Branch probabilities below this are treated as zero when dividing.
DEGENERATE_P = 1e-12
#: Minimum branch norm from which a zero-probability column can still be normalised.
DEGENERATE_NORM = 1e-14


@dataclass(frozen=True, eq=False)
class Measurement:
    """Generalised measurement ``{M_i}`` with ``sum M_i^dag M_i <= 1``."""

    ops: tuple[np.ndarray, ...]

    def __init__(self, ops: Iterable):
        ops = tuple(as_square(m) for m in ops)
        if not ops:
            raise ValueError("a measurement needs at least one operator")
        if any(m.shape != ops[0].shape for m in ops):
            raise DimensionMismatchError("measurement operators have inconsistent shapes")
        object.__setattr__(self, "ops", ops)
        top = float(np.linalg.eigvalsh(self.effect())[-1])
        if top > 1 + BOUND_TOL:
            raise ValueError(f"sum M^dag M exceeds identity (largest eigenvalue {top:.12g})")

    @property
    def dim(self) -> int:
        return self.ops[0].shape[0]

    @property
    def rank(self) -> int:
        return len(self.ops)

    def effect(self) -> np.ndarray:
        return sum(dagger(m) @ m for m in self.ops)

    def effects(self) -> list[np.ndarray]:
        """POVM elements ``M_i^dag M_i``."""
        return [dagger(m) @ m for m in self.ops]

    @property
    def complete(self) -> bool:
        return float(np.max(np.abs(self.effect() - np.eye(self.dim)))) <= COMPLETE_TOL

    def channel(self) -> KrausChannel:
        return KrausChannel(self.ops)


def pvm(basis: Sequence) -> Measurement:
    """Projective measurement onto the given orthonormal vectors."""
    return Measurement([projector(v) for v in basis])


def _check_dims(rho: np.ndarray, *ms: Measurement) -> None:
    for m in ms:
        if m.dim != rho.shape[0]:
            raise DimensionMismatchError(f"measurement dimension {m.dim} does not match state dimension {rho.shape[0]}")


def apply_measurement(rho, m: Measurement) -> tuple[np.ndarray, np.ndarray, list[np.ndarray]]:
    """Non-selective measurement: ``(rho_next, p, branches)``.

    ``branches[i] = M_i rho M_i^dag`` is kept unnormalised and
    ``p_i = tr(M_i^dag M_i rho)``.
    """
    r = as_square(rho)
    _check_dims(r, m)
    branches = [k @ r @ dagger(k) for k in m.ops]
    p = np.array([np.trace(b).real for b in branches])
    p = np.clip(np.where(p < 0, 0.0, p), 0.0, 1.0)
    return sum(branches), p, branches


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    """Left-stochastic matrix ``m[j, i]``: branch ``i`` of one step to branch ``j`` of the next.

    ``degenerate[i]`` marks columns whose source branch had (numerically)
    zero probability. Such a column is the ratio taken on the unnormalised
    branch if that is still resolvable, else the limit along the maximally
    mixed direction, else ``e_1`` (only when ``M_i`` itself vanishes).
    """

    m: np.ndarray
    degenerate: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.degenerate is None:
            object.__setattr__(self, "degenerate", np.zeros(self.m.shape[1], dtype=bool))

    @property
    def shape(self) -> tuple[int, int]:
        return self.m.shape

    def __matmul__(self, p):
        return self.m @ p

    def column_sums(self) -> np.ndarray:
        return self.m.sum(axis=0)


def _transfer(rho, first: Measurement, second: Measurement, weak: bool):
    r = as_square(rho)
    _check_dims(r, first, second)
    n_eff = [dagger(n) @ n for n in second.ops]
    cols, flags = [], []
    for mi in first.ops:
        mm = dagger(mi) @ mi
        p = np.trace(mm @ r)
        if weak:
            num = np.array([np.trace(mm @ ne @ r) for ne in n_eff])
            src = mm @ r
        else:
            branch = mi @ r @ dagger(mi)
            num = np.array([np.trace(ne @ branch) for ne in n_eff])
            src = branch
        if abs(p) >= DEGENERATE_P:
            cols.append(num / p)
            flags.append(False)
            continue
        flags.append(True)
        if np.linalg.norm(src) > DEGENERATE_NORM and abs(np.trace(src)) > 0:
            cols.append(num / np.trace(src))
            continue
        # no usable branch: take the limit along rho -> rho + eps * 1/d
        flat = mm if weak else mi @ dagger(mi)
        tr_flat = np.trace(flat).real
        if tr_flat > DEGENERATE_NORM:
            cols.append(np.array([np.trace(ne @ flat) for ne in n_eff]) / tr_flat)
        else:
            e1 = np.zeros(second.rank, dtype=np.complex128)
            e1[0] = 1.0
            cols.append(e1)
    return np.array(cols).T, np.array(flags, dtype=bool)


def transfer_matrix(rho_prev, first: Measurement, second: Measurement) -> TransferMatrix:
    """Transfer matrix from ``first`` (acting on ``rho_prev``) to ``second``."""
    m, flags = _transfer(rho_prev, first, second, weak=False)
    return TransferMatrix(m.real, flags)


def _check_orthonormal_basis(vs: Sequence) -> np.ndarray:
    b = np.array([np.asarray(v, dtype=np.complex128).reshape(-1) for v in vs]).T
    if b.shape[0] != b.shape[1] or np.max(np.abs(dagger(b) @ b - np.eye(b.shape[1]))) > COMPLETE_TOL:
        raise ValueError("vectors do not form a complete orthonormal basis")
    return b


def pvm_transfer_matrix(first: Sequence, second: Sequence) -> TransferMatrix:
    """State-independent transfer matrix ``m_ji = |<m_i|n_j>|^2`` between two bases."""
    a = _check_orthonormal_basis(first)
    b = _check_orthonormal_basis(second)
    if a.shape != b.shape:
        raise DimensionMismatchError("bases live in different dimensions")
    return TransferMatrix(np.abs(dagger(b) @ a) ** 2)


# -- chains -------------------------------------------------------------------

StepGenerator = Callable[[int, np.ndarray], Measurement]


def constant_step(m: Measurement) -> StepGenerator:
    return lambda k, rho: m


def _as_generator(step: Union[Measurement, StepGenerator]) -> StepGenerator:
    return constant_step(step) if isinstance(step, Measurement) else step


@dataclass(frozen=True, eq=False)
class MeasurementChain:
    """Ordered step generators ``(k, rho_{k-1}) -> Measurement``.

    Steps repeat cyclically, so a single generator describes a homogeneous
    chain and ``[z, x]`` an alternating one.
    """

    steps: tuple[StepGenerator, ...]

    def __init__(self, steps: Iterable[Union[Measurement, StepGenerator]]):
        steps = tuple(_as_generator(s) for s in steps)
        if not steps:
            raise ValueError("a chain needs at least one step")
        object.__setattr__(self, "steps", steps)

    def measurement(self, k: int, rho_prev: np.ndarray) -> Measurement:
        """Measurement performed at step ``k >= 1`` on ``rho_prev``."""
        return self.steps[(k - 1) % len(self.steps)](k, rho_prev)


@dataclass(frozen=True, eq=False)
class ChainStep:
    """Record for step ``n``: state after the step, branch probabilities and
    the transfer matrix from step ``n-1`` (``None`` for ``n < 2``)."""

    n: int
    rho: np.ndarray
    p: np.ndarray | None
    transfer: TransferMatrix | None
    measurement: Measurement | None = field(default=None, repr=False)


def run_chain(rho0, chain: MeasurementChain, n_steps: int) -> list[ChainStep]:
    """Run ``n_steps`` measurements; element 0 of the result is the initial state."""
    rho = check_density(rho0)
    traj = [ChainStep(0, rho, None, None)]
    for k in range(1, n_steps + 1):
        prev = traj[-1]
        m = chain.measurement(k, prev.rho)
        rho_k, p, _ = apply_measurement(prev.rho, m)
        ups = None
        if k >= 2:
            context = traj[-2].rho
            ups = transfer_matrix(context, prev.measurement, m)
        traj.append(ChainStep(k, rho_k, p, ups, m))
    return traj


def is_decontexted(
    first: Union[Measurement, StepGenerator],
    second: Union[Measurement, StepGenerator],
    state_samples: int = 50,
    seed: int = 0,
    tol: float = 1e-10,
    dim: int | None = None,
) -> tuple[bool, float]:
    """Check whether the transfer matrix of a measurement pair depends on the state.

    Samples random density matrices (mixed ranks), builds the transfer
    matrix on each and returns ``(max_deviation < tol, max_deviation)``
    where the deviation is the largest pairwise Frobenius distance.
    ``dim`` is needed only when ``first`` is a generator.
    """
    if dim is None:
        if not isinstance(first, Measurement):
            raise ValueError("pass dim when first is a step generator")
        dim = first.dim
    first, second = _as_generator(first), _as_generator(second)
    rng = make_rng(seed)
    mats = []
    for _ in range(state_samples):
        rank = int(rng.integers(1, dim + 1))
        rho = random_density(dim, rank, seed=int(rng.integers(0, 2**62)))
        m1 = first(1, rho)
        rho1, _, _ = apply_measurement(rho, m1)
        mats.append(transfer_matrix(rho, m1, second(2, rho1)).m)
    stack = np.array(mats)
    dev = 0.0
    for a in range(len(stack)):
        diffs = np.linalg.norm(stack[a + 1:] - stack[a], axis=(1, 2))
        if diffs.size:
            dev = max(dev, float(diffs.max()))
    return dev < tol, dev


# -- worked examples ----------------------------------------------------------


def amplitude_damping_measurement(gamma: float) -> Measurement:
    """``K1 = diag(1, sqrt(gamma))``, ``K2 = sqrt(1-gamma) |g><e|`` with ``|g> = |0>``.

    At ``gamma = 1`` the second operator vanishes and is dropped.
    """
    if not 0 < gamma <= 1:
        raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
    k1 = np.array([[1, 0], [0, np.sqrt(gamma)]], dtype=np.complex128)
    if gamma == 1:
        return Measurement([k1])
    k2 = np.array([[0, np.sqrt(1 - gamma)], [0, 0]], dtype=np.complex128)
    return Measurement([k1, k2])


def _check_amplitudes(alpha, beta) -> None:
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1) > 1e-10:
        raise ValueError("|alpha|^2 + |beta|^2 must equal 1")


def amplitude_damping_initial(alpha: complex, beta: complex) -> np.ndarray:
    """``|psi_0> = alpha |g> + beta |e>`` as a density matrix."""
    _check_amplitudes(alpha, beta)
    return projector([alpha, beta])


def amplitude_damping_analytic(n: int, alpha: complex, beta: complex, gamma: float) -> np.ndarray:
    """Closed-form state after ``n`` damping steps.

    ``[[1 - |b|^2 g^n, a b* g^(n/2)], [a* b g^(n/2), |b|^2 g^n]]``; for real
    amplitudes this is the familiar symmetric form.
    """
    _check_amplitudes(alpha, beta)
    if n < 0:
        raise ValueError("n must be non-negative")
    b2 = abs(beta) ** 2
    off = alpha * np.conj(beta) * gamma ** (n / 2)
    return np.array([[1 - b2 * gamma**n, off], [np.conj(off), b2 * gamma**n]], dtype=np.complex128)


def amplitude_damping_transfer_closed_form(n: int, gamma: float) -> TransferMatrix:
    """Closed-form ``Upsilon_{n,n-1}`` for a chain started in the excited state."""
    if n < 2:
        raise ValueError("the transfer matrix is defined for n >= 2")
    den = 1 - gamma ** (n - 2) + gamma ** (n - 1)
    m = np.array(
        [
            [(1 - gamma ** (n - 2) + gamma**n) / den, 1.0],
            [(gamma ** (n - 1) - gamma**n) / den, 0.0],
        ]
    )
    return TransferMatrix(m)


#: Equilibrium limit of the damping transfer matrix.
UPSILON_INF = np.array([[1.0, 1.0], [0.0, 0.0]])

SPIN_BASES = {
    "z": (np.array([1, 0], dtype=np.complex128), np.array([0, 1], dtype=np.complex128)),
    "x": (np.array([1, 1], dtype=np.complex128) / np.sqrt(2), np.array([1, -1], dtype=np.complex128) / np.sqrt(2)),
    "y": (np.array([1, 1j], dtype=np.complex128) / np.sqrt(2), np.array([1, -1j], dtype=np.complex128) / np.sqrt(2)),
}


def spin_pvm(axis: str) -> Measurement:
    try:
        return pvm(SPIN_BASES[axis])
    except KeyError:
        raise ValueError(f"unknown axis {axis!r}; expected one of x, y, z") from None


def stern_gerlach_chain(axes: Sequence[str]) -> MeasurementChain:
    """Chain of spin-1/2 projective measurements along ``axes`` (cycled)."""
    if not axes:
        raise ValueError("need at least one axis")
    return MeasurementChain([spin_pvm(a) for a in axes])
