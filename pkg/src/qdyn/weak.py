"""Weak-measurement transfer matrices and weak values.

In the weak regime the first measurement barely disturbs the state, so the
pre-measurement state ``rho`` enters the formulas directly:

    m~_ji = tr(M_i^dag M_i N_j^dag N_j rho) / tr(M_i^dag M_i rho)

Entries may be complex; columns still sum to one when ``{N_j}`` is complete.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from qdyn.chain import DEGENERATE_P, Measurement, _transfer
from qdyn.errors import DimensionMismatchError, NonRealError, ZeroPostSelectionError
from qdyn.linalg import as_square, dagger


@dataclass(frozen=True, eq=False)
class WeakTransferMatrix:
    m: np.ndarray
    degenerate: np.ndarray

    def column_sums(self) -> np.ndarray:
        return self.m.sum(axis=0)


@dataclass(frozen=True)
class WeakValue:
    """Weak value of an observable for one post-selected branch, with the branch probability."""

    value: complex
    weight: float


def weak_transfer_matrix(rho, first: Measurement, second: Measurement) -> WeakTransferMatrix:
    m, flags = _transfer(rho, first, second, weak=True)
    return WeakTransferMatrix(m, flags)


def weak_probabilities(rho, m: Measurement) -> np.ndarray:
    """``tr(M_i^dag M_i rho)`` for every outcome."""
    r = as_square(rho)
    return np.array([np.trace(e @ r).real for e in m.effects()])


def weak_value(a, post_op, rho) -> WeakValue:
    """``tr(N^dag N A rho) / tr(N^dag N rho)`` for post-selection operator ``N``."""
    o = as_square(a)
    n = as_square(post_op)
    r = as_square(rho)
    if not o.shape == n.shape == r.shape:
        raise DimensionMismatchError(f"shapes differ: A {o.shape}, N {n.shape}, rho {r.shape}")
    eff = dagger(n) @ n
    q = np.trace(eff @ r)
    if abs(q) <= DEGENERATE_P:
        raise ZeroPostSelectionError(f"post-selection probability {abs(q):.3e} is too small")
    return WeakValue(complex(np.trace(eff @ o @ r) / q), float(q.real))


def weak_values(a, second: Measurement, rho, skip_degenerate: bool = True) -> list[WeakValue | None]:
    """Weak value for each outcome of ``second``; degenerate branches give ``None``
    (or raise when ``skip_degenerate`` is false)."""
    out = []
    for n in second.ops:
        try:
            out.append(weak_value(a, n, rho))
        except ZeroPostSelectionError:
            if not skip_degenerate:
                raise
            out.append(None)
    return out


def weak_expectation_check(a, second: Measurement, rho) -> tuple[float, float]:
    """Both sides of ``sum_j w_j q_j = tr(A rho)``; zero-weight branches are skipped."""
    o = as_square(a)
    lhs = sum(wv.value * wv.weight for wv in weak_values(o, second, rho) if wv is not None)
    rhs = np.trace(o @ as_square(rho))
    for name, v in (("weak-value sum", lhs), ("tr(A rho)", rhs)):
        if abs(np.imag(v)) >= 1e-8:
            raise NonRealError(f"{name} has imaginary part {np.imag(v):.3e}")
    return float(np.real(lhs)), float(np.real(rhs))


def weak_transition_as_weak_value(i: int, j: int, first: Measurement, second: Measurement, rho) -> complex:
    """Entry ``m~_ji``, computed as the weak value of ``N_j^dag N_j`` post-selected on ``M_i``."""
    nj = second.ops[j]
    return weak_value(dagger(nj) @ nj, first.ops[i], rho).value
