"""Channel representations and the positivity hierarchy.

Conventions
-----------
* Choi matrix: ``C = sum_ij Phi(|i><j|) ⊗ |i><j|`` (output factor first).
  This equals ``d (Phi ⊗ 1)(|xi><xi|)`` for ``|xi> = sum_i |ii>/sqrt(d)``.
* ``vec`` stacks rows: ``vec(A)[a*d + b] = A[a, b]``. The natural
  (Liouville) representation satisfies ``vec(Phi(X)) = N vec(X)`` and is
  ``N = sum_k K_k ⊗ conj(K_k)``.
* With these conventions ``N[(a,b),(i,j)] = C[(a,i),(b,j)]``; swapping the
  two middle indices is an involution mapping one onto the other.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import minimize

from qdyn.errors import (
    DimensionMismatchError,
    NotCPError,
    NotHermitianError,
    NotTracePreservingError,
)
from qdyn.linalg import (
    PSD_TOL,
    as_matrix,
    as_square,
    check_hermitian,
    dagger,
    hermitian_eig,
    herm_tol,
    kron,
    partial_trace,
)
from qdyn.states import OperatorBasis, make_rng, random_unitary

TP_TOL = 1e-10
TRACE_CLASS_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """Operator-sum representation ``rho -> sum_i K_i rho K_i^dag``.

    Trace-non-increasing channels (``sum K^dag K <= 1``) are allowed; use
    :attr:`is_tp` to test trace preservation.
    """

    kraus: tuple[np.ndarray, ...]

    def __init__(self, kraus: Iterable):
        ops = tuple(as_matrix(k) for k in kraus)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        shape = ops[0].shape
        if any(k.shape != shape for k in ops):
            raise DimensionMismatchError("Kraus operators have inconsistent shapes")
        object.__setattr__(self, "kraus", ops)
        top = float(np.linalg.eigvalsh(self.effect())[-1])
        if top > 1 + TRACE_CLASS_TOL:
            raise ValueError(f"sum K^dag K exceeds identity (largest eigenvalue {top:.12g})")

    @property
    def dim_in(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.kraus[0].shape[0]

    def __len__(self) -> int:
        return len(self.kraus)

    def effect(self) -> np.ndarray:
        """``sum_i K_i^dag K_i``."""
        return sum(dagger(k) @ k for k in self.kraus)

    @property
    def tp_residual(self) -> float:
        return float(np.linalg.norm(self.effect() - np.eye(self.dim_in)))

    @property
    def is_tp(self) -> bool:
        return float(np.max(np.abs(self.effect() - np.eye(self.dim_in)))) <= TP_TOL


def identity_channel(d: int) -> KrausChannel:
    return KrausChannel([np.eye(d)])


def unitary_channel(u) -> KrausChannel:
    return KrausChannel([u])


def random_channel(d: int, n_kraus: int, seed: int, d_out: int | None = None) -> KrausChannel:
    """Random CPTP channel from a Haar isometry ``d -> d_out * n_kraus``."""
    d_out = d if d_out is None else d_out
    u = random_unitary(d_out * n_kraus, seed)
    iso = u[:, :d]
    return KrausChannel([iso[k * d_out:(k + 1) * d_out] for k in range(n_kraus)])


def _check_input(ch: KrausChannel, x) -> np.ndarray:
    a = as_square(x)
    if a.shape[0] != ch.dim_in:
        raise DimensionMismatchError(f"operator dimension {a.shape[0]} does not match channel input {ch.dim_in}")
    return a


def apply(ch: KrausChannel, rho, renormalize: bool = False) -> np.ndarray:
    """Schrödinger-picture action ``sum_i K_i rho K_i^dag``.

    The output trace is left as is unless ``renormalize`` is set.
    """
    r = _check_input(ch, rho)
    out = sum(k @ r @ dagger(k) for k in ch.kraus)
    if renormalize:
        tr = np.trace(out).real
        if tr <= 0:
            raise ValueError("cannot renormalise an output with zero trace")
        out = out / tr
    return out


def heisenberg_apply(ch: KrausChannel, a) -> np.ndarray:
    """Heisenberg-picture action ``sum_i K_i^dag a K_i``."""
    o = as_square(a)
    if o.shape[0] != ch.dim_out:
        raise DimensionMismatchError(f"observable dimension {o.shape[0]} does not match channel output {ch.dim_out}")
    return sum(dagger(k) @ o @ k for k in ch.kraus)


def compose(second: KrausChannel, first: KrausChannel) -> KrausChannel:
    """Channel ``second ∘ first`` with Kraus set ``{N_j M_i}``."""
    if first.dim_out != second.dim_in:
        raise DimensionMismatchError(f"cannot compose: {first.dim_out} != {second.dim_in}")
    return KrausChannel([n @ m for m in first.kraus for n in second.kraus])


def tensor_identity(ch: KrausChannel, m: int) -> KrausChannel:
    """``Phi ⊗ 1_m`` acting on system ⊗ ancilla."""
    return KrausChannel([kron(k, np.eye(m)) for k in ch.kraus])


# -- Choi -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    """Choi matrix ``sum_ij Phi(|i><j|) ⊗ |i><j|`` of a linear map."""

    mat: np.ndarray
    dim_out: int
    dim_in: int

    def __post_init__(self):
        m = as_square(self.mat)
        if m.shape[0] != self.dim_out * self.dim_in:
            raise DimensionMismatchError(
                f"Choi matrix of size {m.shape[0]} does not match {self.dim_out} x {self.dim_in}"
            )
        object.__setattr__(self, "mat", m)

    @classmethod
    def square(cls, mat) -> "ChoiMatrix":
        m = as_square(mat)
        d = int(round(np.sqrt(m.shape[0])))
        if d * d != m.shape[0]:
            raise DimensionMismatchError(f"Choi matrix size {m.shape[0]} is not a perfect square")
        return cls(m, d, d)

    @property
    def d(self) -> int:
        return self.dim_in

    def eigenvalues(self) -> np.ndarray:
        w, _ = hermitian_eig(self.mat)
        return w

    def is_cp(self, tol: float = PSD_TOL) -> bool:
        return bool(self.eigenvalues()[0] >= -tol)

    @property
    def tp_residual(self) -> float:
        """``|| tr_out C - 1 ||_F``; zero iff the map is trace preserving."""
        red = partial_trace(self.mat, (self.dim_out, self.dim_in), [1])
        return float(np.linalg.norm(red - np.eye(self.dim_in)))

    def rank(self, tol: float = 1e-12) -> int:
        w = self.eigenvalues()
        return int(np.sum(np.abs(w) > tol))

    def normalized(self) -> np.ndarray:
        """Choi state ``C / d_in``."""
        return self.mat / self.dim_in

    def apply(self, x) -> np.ndarray:
        """Map action recovered from the Choi matrix: ``tr_2[C (1 ⊗ X^T)]``."""
        a = as_square(x)
        if a.shape[0] != self.dim_in:
            raise DimensionMismatchError(f"operator dimension {a.shape[0]} does not match map input {self.dim_in}")
        t = self.mat.reshape(self.dim_out, self.dim_in, self.dim_out, self.dim_in)
        return np.einsum("aibj,ij->ab", t, a)


def choi(ch: KrausChannel) -> ChoiMatrix:
    c = np.zeros((ch.dim_out * ch.dim_in,) * 2, dtype=np.complex128)
    for k in ch.kraus:
        v = k.reshape(-1)  # v[(a, i)] = K[a, i]
        c += np.outer(v, v.conj())
    return ChoiMatrix(c, ch.dim_out, ch.dim_in)


def choi_of_map(fn: Callable[[np.ndarray], np.ndarray], dim_in: int, dim_out: int | None = None) -> ChoiMatrix:
    """Choi matrix of an arbitrary linear map given as a callable."""
    dim_out = dim_in if dim_out is None else dim_out
    c = np.zeros((dim_out * dim_in,) * 2, dtype=np.complex128)
    for i in range(dim_in):
        for j in range(dim_in):
            e = np.zeros((dim_in, dim_in), dtype=np.complex128)
            e[i, j] = 1
            c += kron(as_matrix(fn(e)), e)
    return ChoiMatrix(c, dim_out, dim_in)


def transpose_map_choi(d: int) -> ChoiMatrix:
    """Choi matrix of ``X -> X^T`` (the swap operator)."""
    return choi_of_map(np.transpose, d)


def kraus_from_choi(c, tol: float = PSD_TOL) -> KrausChannel:
    """Kraus operators from the eigendecomposition of a PSD Choi matrix.

    Eigenvalues in ``[-tol, tol]`` are dropped. At most ``d_out * d_in``
    operators are produced.
    """
    c = c if isinstance(c, ChoiMatrix) else ChoiMatrix.square(c)
    w, v = hermitian_eig(c.mat)
    if w[0] < -tol:
        raise NotCPError(f"Choi matrix has eigenvalue {w[0]:.6g} < -{tol:g}; map is not CP")
    ops = [np.sqrt(lam) * v[:, k].reshape(c.dim_out, c.dim_in) for k, lam in enumerate(w) if lam > tol]
    if not ops:
        ops = [np.zeros((c.dim_out, c.dim_in))]
    return KrausChannel(ops)


# -- natural / reshuffled ---------------------------------------------------


def natural_rep(ch: KrausChannel) -> np.ndarray:
    """Liouville matrix ``N`` with ``vec(Phi(X)) = N vec(X)`` (row stacking)."""
    return sum(np.kron(k, k.conj()) for k in ch.kraus)


def reshuffle(n, d: int) -> np.ndarray:
    """Index involution ``<ik|R|jl> = <ij|C|kl>`` on a ``d^2 x d^2`` matrix."""
    a = as_square(n)
    if a.shape[0] != d * d:
        raise DimensionMismatchError(f"matrix size {a.shape[0]} is not d^2 = {d * d}")
    return a.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)


# -- affine / Bloch ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class AffineRep:
    """Affine Bloch-vector action ``f' = R f + r``."""

    R: np.ndarray
    r: np.ndarray
    basis: OperatorBasis = field(repr=False)

    @property
    def dim(self) -> int:
        return self.basis.dim

    def full_matrix(self) -> np.ndarray:
        """Block matrix ``[[1, 0], [r, R]]`` acting on ``(1, f)``."""
        n = len(self.r)
        m = np.zeros((n + 1, n + 1))
        m[0, 0] = 1.0
        m[1:, 0] = self.r
        m[1:, 1:] = self.R
        return m

    def __call__(self, f) -> np.ndarray:
        return self.R @ np.asarray(f, dtype=float) + self.r


def affine_rep(ch: KrausChannel, basis: OperatorBasis) -> AffineRep:
    """Affine representation of a trace-preserving channel in ``basis``.

    With ``S_ij = tr(F_i Phi(F_j))`` and ``f_i = d tr(F_i rho)``, the map on
    coherence vectors is ``R = S[1:, 1:]`` and ``r = sqrt(d) S[1:, 0]``.
    """
    d = basis.dim
    if ch.dim_in != d or ch.dim_out != d:
        raise DimensionMismatchError(f"channel {ch.dim_out}x{ch.dim_in} does not match basis dimension {d}")
    if not ch.is_tp:
        raise NotTracePreservingError("affine representation requires a trace-preserving channel")
    s = np.array([basis.coefficients(apply(ch, f)) for f in basis.elements]).T
    if np.max(np.abs(s.imag)) > 1e-10:
        raise NotHermitianError("channel does not preserve Hermiticity")
    s = s.real
    return AffineRep(s[1:, 1:], np.sqrt(d) * s[1:, 0], basis)


# -- Hermitian maps -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class HermitianMapRep:
    """Map ``O -> sum_ab d_ab K_a^dag O K_b`` with Hermitian coefficients."""

    coeff: np.ndarray
    family: tuple[np.ndarray, ...]

    def __init__(self, coeff, family: Sequence):
        fam = tuple(as_matrix(k) for k in family)
        c = as_square(coeff)
        if c.shape[0] != len(fam):
            raise DimensionMismatchError(f"coefficient matrix is {c.shape} but family has {len(fam)} operators")
        if np.max(np.abs(c - dagger(c))) > herm_tol(c):
            raise NotHermitianError("coefficient matrix d_ab is not Hermitian")
        if any(k.shape != fam[0].shape for k in fam):
            raise DimensionMismatchError("family operators have inconsistent shapes")
        object.__setattr__(self, "coeff", c)
        object.__setattr__(self, "family", fam)

    @property
    def dim_in(self) -> int:
        return self.family[0].shape[0]

    @property
    def dim_out(self) -> int:
        return self.family[0].shape[1]


def hermitian_map_apply(h: HermitianMapRep, a) -> np.ndarray:
    o = as_square(a)
    if o.shape[0] != h.dim_in:
        raise DimensionMismatchError(f"operator dimension {o.shape[0]} does not match map dimension {h.dim_in}")
    fam = np.array(h.family)
    left = np.einsum("kba,bc->kac", fam.conj(), o)  # K_a^dag O
    return np.einsum("kl,kac,lcd->ad", h.coeff, left, fam)


# -- partial transpose and classification -----------------------------------------


def partial_transpose(rho, dims: Sequence[int], which: int) -> np.ndarray:
    """Transpose factor ``which`` (0-based) of a multipartite operator."""
    a = as_square(rho)
    dims = tuple(int(x) for x in dims)
    if int(np.prod(dims)) != a.shape[0]:
        raise DimensionMismatchError(f"dims {dims} do not match operator size {a.shape[0]}")
    if not 0 <= which < len(dims):
        raise DimensionMismatchError(f"factor {which} out of range for {len(dims)} factors")
    n = len(dims)
    axes = list(range(2 * n))
    axes[which], axes[n + which] = axes[n + which], axes[which]
    return a.reshape(dims + dims).transpose(axes).reshape(a.shape)


class MapClass(enum.Enum):
    """Nested map classes ``H ⊃ PP ⊃ P ⊃ CP``."""

    HERMITIAN = "Hermitian"
    PHYSICALLY_POSITIVE = "PhysicallyPositive"
    POSITIVE = "Positive"
    COMPLETELY_POSITIVE = "CompletelyPositive"


def _min_output_eig(c: ChoiMatrix, psi: np.ndarray) -> float:
    out = c.apply(np.outer(psi, psi.conj()))
    return float(np.linalg.eigvalsh((out + dagger(out)) / 2)[0])


def _qubit_sphere_minimum(c: ChoiMatrix) -> float:
    """Smallest output eigenvalue over pure qubit inputs (grid + local refine)."""

    def f(x):
        th, ph = x
        psi = np.array([np.cos(th / 2), np.exp(1j * ph) * np.sin(th / 2)])
        return _min_output_eig(c, psi)

    grid = [(th, ph) for th in np.linspace(0, np.pi, 25) for ph in np.linspace(0, 2 * np.pi, 48, endpoint=False)]
    vals = np.array([f(g) for g in grid])
    best = float(vals.min())
    for idx in np.argsort(vals)[:4]:
        res = minimize(f, grid[idx], method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-13})
        best = min(best, float(res.fun))
    return best


def _check_hermitian_choi(c) -> ChoiMatrix:
    c = c if isinstance(c, ChoiMatrix) else ChoiMatrix.square(c)
    check_hermitian(c.mat, "Choi matrix")
    return c


def classify(c, samples: int = 500, seed: int = 0, tol: float = PSD_TOL) -> MapClass:
    """Place a Hermiticity-preserving map in the hierarchy ``H ⊃ P ⊃ CP``.

    This is a semi-decision. ``COMPLETELY_POSITIVE`` is exact (Choi PSD).
    ``POSITIVE`` means no negative output was found on ``samples`` random
    pure inputs and, for qubit inputs, the decomposability shortcut (Choi
    partial transpose PSD) or a dense scan of the Bloch sphere found none
    either. Larger input dimensions rely on sampling alone.
    """
    c = _check_hermitian_choi(c)
    if c.is_cp(tol):
        return MapClass.COMPLETELY_POSITIVE
    rng = make_rng(seed)
    for _ in range(samples):
        psi = rng.standard_normal(c.dim_in) + 1j * rng.standard_normal(c.dim_in)
        if _min_output_eig(c, psi / np.linalg.norm(psi)) < -tol:
            return MapClass.HERMITIAN
    if c.dim_in <= 2:
        pt = partial_transpose(c.mat, (c.dim_out, c.dim_in), 1)
        if np.linalg.eigvalsh((pt + dagger(pt)) / 2)[0] < -tol and _qubit_sphere_minimum(c) < -tol:
            return MapClass.HERMITIAN
    return MapClass.POSITIVE


def classify_on_domain(c, states: Iterable, tol: float = PSD_TOL) -> MapClass:
    """Domain-restricted verdict: positive on every supplied state gives ``PHYSICALLY_POSITIVE``."""
    c = _check_hermitian_choi(c)
    if c.is_cp(tol):
        return MapClass.COMPLETELY_POSITIVE
    for rho in states:
        out = c.apply(rho)
        if np.linalg.eigvalsh((out + dagger(out)) / 2)[0] < -tol:
            return MapClass.HERMITIAN
    return MapClass.PHYSICALLY_POSITIVE
