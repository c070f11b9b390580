"""Random states, unitaries, measurements and channels for property tests."""

from __future__ import annotations

import numpy as np

from .channel import CQChannel, validate_channel
from .operators import ResolutionOfIdentity, gen_inv_sqrt


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Ginibre-distributed density matrix of the given rank (full rank by default)."""
    k = d if rank is None else rank
    g = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    m = g @ g.conj().T
    return m / np.trace(m).real


def random_pure(d: int, rng: np.random.Generator) -> np.ndarray:
    return random_density(d, rng, rank=1)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR with phase correction."""
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_povm(d: int, outcomes: int, rng: np.random.Generator) -> ResolutionOfIdentity:
    """Complete POVM ``X_k = T^{-1/2} A_k T^{-1/2}`` from random positive ``A_k``."""
    parts = [random_density(d, rng) for _ in range(outcomes)]
    root = gen_inv_sqrt(sum(parts))
    elems = [root @ a @ root for a in parts]
    elems = [(x + x.conj().T) / 2 for x in elems]
    return ResolutionOfIdentity(tuple(elems))


def random_channel(a: int, d: int, rng: np.random.Generator, pure: bool = False) -> CQChannel:
    ranks = [1 if pure else int(rng.integers(1, d + 1)) for _ in range(a)]
    return validate_channel([random_density(d, rng, r) for r in ranks])


def random_prior(a: int, rng: np.random.Generator) -> np.ndarray:
    p = rng.dirichlet(np.ones(a))
    return p / p.sum()
