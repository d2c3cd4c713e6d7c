"""Average fidelity and fidelity deviation of approximate spin-flip maps.

The figure of merit for a map E acting on Bloch vectors is the flip
fidelity f[a] = (1 - a . r_out(a)) / 2 against the antipodal target state.
Averaging f and f^2 over the uniform sphere gives the pair (F, Delta)
computed here in closed form for single gates, stochastic mixtures of
gates, affine Bloch channels, and three-qubit dilations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import StochasticMap
from .rotation import OneQubitGate, rotation_trace

__all__ = [
    "FidelityStats",
    "AffineBlochChannel",
    "pointwise_fidelity",
    "one_qubit_stats",
    "rotation_pair_second_moment",
    "pair_covariance",
    "covariance_matrix",
    "stochastic_map_stats",
    "affine_channel_stats",
    "three_qubit_avg_fidelity",
    "region_membership",
    "MAX_AVG_FIDELITY",
    "DEVIATION_SLOPE",
]

# A perfect universal flip is impossible; 2/3 is the best average fidelity
# any physical map can reach.
MAX_AVG_FIDELITY = 2.0 / 3.0

# Single gates and their mixtures satisfy Delta <= F * DEVIATION_SLOPE.
DEVIATION_SLOPE = 1.0 / np.sqrt(5.0)

_VAR_CLIP = 1e-12
_STATS_TOL = 1e-12
_BLOCH_NORM_TOL = 1e-9
_UNITARY_TOL = 1e-8


@dataclass(frozen=True)
class FidelityStats:
    """Average fidelity and its standard deviation over uniform pure inputs."""

    avg_fidelity: float
    deviation: float

    def __post_init__(self):
        f, d = float(self.avg_fidelity), float(self.deviation)
        if not (-_STATS_TOL <= f <= 1.0 + _STATS_TOL):
            raise ValueError(f"avg_fidelity {f} outside [0, 1]")
        if not (-_STATS_TOL <= d <= 0.5 + _STATS_TOL):
            raise ValueError(f"deviation {d} outside [0, 1/2]")
        object.__setattr__(self, "avg_fidelity", f)
        object.__setattr__(self, "deviation", d)


@dataclass(frozen=True)
class AffineBlochChannel:
    """Qubit channel acting on Bloch vectors as a -> linear @ a + shift."""

    linear: np.ndarray
    shift: np.ndarray

    def __post_init__(self):
        linear = np.asarray(self.linear, dtype=float)
        shift = np.asarray(self.shift, dtype=float)
        if linear.shape != (3, 3):
            raise ValueError(f"linear part must be 3x3, got {linear.shape}")
        if shift.shape != (3,):
            raise ValueError(f"shift must have shape (3,), got {shift.shape}")
        if not (np.all(np.isfinite(linear)) and np.all(np.isfinite(shift))):
            raise ValueError("channel entries must be finite")
        linear = linear.copy()
        shift = shift.copy()
        linear.setflags(write=False)
        shift.setflags(write=False)
        object.__setattr__(self, "linear", linear)
        object.__setattr__(self, "shift", shift)


def _deviation_from_variance(var: float) -> float:
    # Exact cancellation can leave tiny negative variances; anything worse
    # signals a real inconsistency.
    if var < -_VAR_CLIP:
        raise RuntimeError(f"variance {var} below clipping threshold")
    return float(np.sqrt(max(var, 0.0)))


def pointwise_fidelity(rotation: np.ndarray, bloch: np.ndarray) -> np.ndarray | float:
    """Flip fidelity f = (1 - a . R a) / 2 for one or many Bloch vectors.

    `bloch` may have shape (3,) or (..., 3); unit norm is required within 1e-9.
    """
    rotation = np.asarray(rotation, dtype=float)
    bloch = np.asarray(bloch, dtype=float)
    if rotation.shape != (3, 3):
        raise ValueError(f"rotation must be 3x3, got {rotation.shape}")
    if bloch.shape[-1:] != (3,):
        raise ValueError("bloch vectors must have trailing dimension 3")
    norms = np.linalg.norm(bloch, axis=-1)
    if np.max(np.abs(norms - 1.0)) > _BLOCH_NORM_TOL:
        raise ValueError("bloch vectors must be unit length within 1e-9")
    quad = np.einsum("...i,ij,...j->...", bloch, rotation, bloch)
    f = 0.5 * (1.0 - quad)
    return float(f) if f.ndim == 0 else f


def one_qubit_stats(gate: OneQubitGate) -> FidelityStats:
    """Closed-form (F, Delta) of a single gate.

    F = (3 - Tr R) / 6 and Delta = F / sqrt(5); both depend on the angle only.
    """
    f = (3.0 - rotation_trace(gate)) / 6.0
    return FidelityStats(f, f * DEVIATION_SLOPE)


def rotation_pair_second_moment(r_k: np.ndarray, r_l: np.ndarray) -> float:
    """Sphere average of (a . R_k a)(a . R_l a).

    Equals [Tr R_k Tr R_l + Tr(R_k R_l^T) + Tr(R_k R_l)] / 15 by the
    isotropic fourth-moment identity of the uniform sphere.
    """
    r_k = np.asarray(r_k, dtype=float)
    r_l = np.asarray(r_l, dtype=float)
    return (
        np.trace(r_k) * np.trace(r_l)
        + np.trace(r_k @ r_l.T)
        + np.trace(r_k @ r_l)
    ) / 15.0


def pair_covariance(gate_k: OneQubitGate, gate_l: OneQubitGate) -> float:
    """Covariance of the pointwise fidelities of two gates over the sphere.

    Reduces to (1 - cos t_k)(1 - cos t_l)(3 (n_k . n_l)^2 - 1) / 90, which is
    used instead of the raw trace combination because it keeps full relative
    precision for small angles.  The diagonal case reproduces Delta^2 of a
    single gate; off-diagonal values range between -Delta_k Delta_l / 2
    (orthogonal axes) and +Delta_k Delta_l (parallel axes).
    """
    overlap_sq = float(np.dot(gate_k.axis, gate_l.axis)) ** 2
    return (
        (1.0 - np.cos(gate_k.angle))
        * (1.0 - np.cos(gate_l.angle))
        * (3.0 * overlap_sq - 1.0)
        / 90.0
    )


def covariance_matrix(gates: tuple[OneQubitGate, ...]) -> np.ndarray:
    """Symmetric matrix of pairwise fidelity covariances."""
    n = len(gates)
    cov = np.empty((n, n))
    for k in range(n):
        for l in range(k, n):
            cov[k, l] = cov[l, k] = pair_covariance(gates[k], gates[l])
    return cov


def stochastic_map_stats(smap: StochasticMap) -> FidelityStats:
    """(F, Delta) of a convex mixture of gates.

    F is the weighted mean of the per-gate fidelities; Delta^2 = w @ C @ w
    with C the pairwise covariance matrix.
    """
    f_each = np.array([one_qubit_stats(g).avg_fidelity for g in smap.gates])
    cov = covariance_matrix(smap.gates)
    var = float(smap.weights @ cov @ smap.weights)
    return FidelityStats(float(smap.weights @ f_each), _deviation_from_variance(var))


def affine_channel_stats(channel: AffineBlochChannel) -> FidelityStats:
    """(F, Delta) of an affine Bloch channel a -> M a + c.

    F = 1/2 - Tr M / 6.  The variance combines the isotropic second and
    fourth sphere moments:
    Delta^2 = [ (Tr(M)^2 + Tr(M M^T) + Tr(M M)) / 15 + |c|^2 / 3 - Tr(M)^2 / 9 ] / 4.
    """
    m = channel.linear
    c = channel.shift
    tr = np.trace(m)
    second = rotation_pair_second_moment(m, m)
    var = 0.25 * (second + c @ c / 3.0 - tr * tr / 9.0)
    return FidelityStats(0.5 - tr / 6.0, _deviation_from_variance(var))


def three_qubit_avg_fidelity(u: np.ndarray) -> float:
    """Average flip fidelity of an 8x8 unitary on system + two fresh ancillas.

    Basis ordering puts the system qubit first (most significant bit), the
    ancillas start in |00>.  In closed form
    F = 2/3 - (1/6) sum_m |u[m, 0] + u[m + 4, 4]|^2, bounded by [0, 2/3].
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (8, 8):
        raise ValueError(f"expected an 8x8 matrix, got shape {u.shape}")
    if np.max(np.abs(u @ u.conj().T - np.eye(8))) > _UNITARY_TOL:
        raise ValueError("matrix is not unitary within tolerance")
    overlap = u[0:4, 0] + u[4:8, 4]
    return MAX_AVG_FIDELITY - float(np.sum(np.abs(overlap) ** 2)) / 6.0


def region_membership(stats: FidelityStats, qubit_count: int, tol: float = 1e-9) -> bool:
    """Whether (F, Delta) lies in the attainable region for `qubit_count` qubits.

    One qubit: the line Delta = F / sqrt(5).  Two qubits: the band
    F / (2 sqrt(5)) <= Delta <= F / sqrt(5).  Three or more: the full wedge
    0 <= Delta <= F / sqrt(5).  All regions require 0 <= F <= 2/3.
    """
    if qubit_count < 1:
        raise ValueError("qubit_count must be at least 1")
    f, d = stats.avg_fidelity, stats.deviation
    if f < -tol or f > MAX_AVG_FIDELITY + tol:
        return False
    upper = f * DEVIATION_SLOPE
    if qubit_count == 1:
        return abs(d - upper) <= tol
    if qubit_count == 2:
        return 0.5 * upper - tol <= d <= upper + tol
    return -tol <= d <= upper + tol
