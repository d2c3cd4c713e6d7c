"""Monte-Carlo reference estimates for sphere averages.

Closed-form fidelity statistics in this package are always checkable
against direct sampling: draw Bloch vectors uniformly on the sphere, push
them through the channel, and average the pointwise flip fidelity.  The
sampler wraps numpy's PCG64 generator so every estimate is reproducible
from a single integer seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import qr

__all__ = [
    "SeededSampler",
    "McEstimate",
    "sample_bloch",
    "sample_unitary",
    "sample_gate",
    "sample_ladder_circuit",
    "mc_stats",
    "bloch_map_from_affine",
    "bloch_map_from_stochastic",
    "bloch_map_from_three_qubit_unitary",
]

RNG_ALGORITHM = "numpy-pcg64"


@dataclass
class SeededSampler:
    """Reproducible random source: same seed, same draw sequence.

    `position` counts scalar draws consumed, so two samplers with equal
    seed and position produce identical futures.
    """

    seed: int
    position: int = field(default=0, init=False)

    def __post_init__(self):
        seed = int(self.seed)
        if not 0 <= seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        self.seed = seed
        self._rng = np.random.default_rng(seed)

    def standard_normal(self, size) -> np.ndarray:
        out = self._rng.standard_normal(size)
        self.position += out.size
        return out

    def uniform(self, low: float, high: float, size) -> np.ndarray:
        out = self._rng.uniform(low, high, size)
        self.position += out.size
        return out

    def random(self, size) -> np.ndarray:
        out = self._rng.random(size)
        self.position += out.size
        return out

    def pick_distinct(self, pool_size: int, count: int) -> np.ndarray:
        """Draw `count` distinct indices from range(pool_size)."""
        out = self._rng.choice(pool_size, size=count, replace=False)
        self.position += count
        return out

    def split(self, count: int) -> list["SeededSampler"]:
        """Derive independent child samplers, deterministic in the seed."""
        children = np.random.SeedSequence(self.seed).spawn(count)
        return [
            SeededSampler(int(child.generate_state(1, dtype=np.uint64)[0]))
            for child in children
        ]


@dataclass(frozen=True)
class McEstimate:
    """Sample estimate with its standard error and sample count."""

    value: float
    std_error: float
    n_samples: int

    def __post_init__(self):
        if self.std_error < 0.0:
            raise ValueError("std_error must be nonnegative")
        if self.n_samples < 1:
            raise ValueError("n_samples must be positive")


def sample_bloch(sampler: SeededSampler, count: int | None = None) -> np.ndarray:
    """Uniform point(s) on the unit sphere via normalized Gaussian triples."""
    n = 1 if count is None else int(count)
    if n < 1:
        raise ValueError("count must be positive")
    v = sampler.standard_normal((n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v[0] if count is None else v


def sample_unitary(sampler: SeededSampler, dim: int) -> np.ndarray:
    """Haar-random unitary from a QR-decomposed complex Ginibre matrix.

    The R factor's diagonal phases are divided out so the distribution is
    exactly Haar rather than QR-convention dependent.
    """
    if dim < 1:
        raise ValueError("dim must be positive")
    z = (
        sampler.standard_normal((dim, dim))
        + 1.0j * sampler.standard_normal((dim, dim))
    ) / np.sqrt(2.0)
    q, r = qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def sample_gate(sampler: SeededSampler):
    """Random gate: angle uniform in [0, 2*pi), axis uniform on the sphere."""
    from .rotation import OneQubitGate

    angle = float(sampler.uniform(0.0, 2.0 * np.pi, 1)[0])
    return OneQubitGate(angle, sample_bloch(sampler))


def sample_ladder_circuit(sampler: SeededSampler, qubit_count: int):
    """Random ladder: uniform preparation parameters and random gates."""
    from .circuit import LadderCircuit

    if qubit_count < 1:
        raise ValueError("qubit_count must be at least 1")
    preps = tuple(float(v) for v in sampler.uniform(0.0, 1.0, qubit_count - 1))
    gates = tuple(sample_gate(sampler) for _ in range(qubit_count))
    return LadderCircuit(preps, gates)


def mc_stats(
    bloch_map, sampler: SeededSampler, n_samples: int
) -> tuple[McEstimate, McEstimate]:
    """Monte-Carlo (F, Delta) of a channel given by its Bloch-vector action.

    `bloch_map` maps an (n, 3) array of input Bloch vectors to the (n, 3)
    output vectors.  Delta is the population standard deviation of the
    pointwise fidelities; its standard error comes from the delta method
    applied to the sample variance.
    """
    n = int(n_samples)
    if n < 2:
        raise ValueError("need at least two samples")
    a = sample_bloch(sampler, n)
    out = np.asarray(bloch_map(a), dtype=float)
    if out.shape != (n, 3):
        raise ValueError(f"bloch_map returned shape {out.shape}, expected ({n}, 3)")
    f = 0.5 * (1.0 - np.einsum("ni,ni->n", a, out))
    mean = float(np.mean(f))
    centered = f - mean
    m2 = float(np.mean(centered**2))
    m4 = float(np.mean(centered**4))
    std = float(np.sqrt(m2))
    se_mean = std / np.sqrt(n)
    se_var = np.sqrt(max(m4 - m2 * m2, 0.0) / n)
    se_std = se_var / (2.0 * std) if std > 0.0 else 0.0
    return McEstimate(mean, se_mean, n), McEstimate(std, se_std, n)


def bloch_map_from_affine(channel) -> "callable":
    """Bloch action of an affine channel (duck-typed: .linear and .shift)."""
    linear = np.asarray(channel.linear, dtype=float)
    shift = np.asarray(channel.shift, dtype=float)
    return lambda a: a @ linear.T + shift


def bloch_map_from_stochastic(smap) -> "callable":
    """Bloch action of a stochastic gate mixture."""
    linear = smap.bloch_linear()
    return lambda a: a @ linear.T


def bloch_map_from_three_qubit_unitary(u: np.ndarray) -> "callable":
    """Bloch action of an 8x8 unitary on system (x) |00>, by state vectors.

    Independent of any Kraus or affine reduction: each input Bloch vector
    becomes a pure system state, the joint state is evolved, and the reduced
    system Bloch vector is read off the 2x2 marginal.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (8, 8):
        raise ValueError(f"expected an 8x8 matrix, got shape {u.shape}")
    col0 = u[:, 0]
    col4 = u[:, 4]

    def act(a: np.ndarray) -> np.ndarray:
        a = np.atleast_2d(np.asarray(a, dtype=float))
        theta = np.arccos(np.clip(a[:, 2], -1.0, 1.0))
        phi = np.arctan2(a[:, 1], a[:, 0])
        amp0 = np.cos(0.5 * theta)
        amp1 = np.exp(1.0j * phi) * np.sin(0.5 * theta)
        psi = amp0[:, None] * col0[None, :] + amp1[:, None] * col4[None, :]
        blocks = psi.reshape(-1, 2, 4)
        rho = np.einsum("nsm,ntm->nst", blocks, blocks.conj())
        return np.stack(
            [
                2.0 * rho[:, 1, 0].real,
                2.0 * rho[:, 1, 0].imag,
                (rho[:, 0, 0] - rho[:, 1, 1]).real,
            ],
            axis=1,
        )

    return act
