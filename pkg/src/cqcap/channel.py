"""Classical-quantum channels, priors and their information quantities."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import ArgumentError, ResourceError, ValidationError
from .operators import (
    DEFAULT_TOL,
    ResolutionOfIdentity,
    SpectralDecomposition,
    Tolerances,
    density_violations,
    entropy_of_spectrum,
    spectral_decompose,
    tensor_product,
    validate_density,
)

#: Largest Hilbert-space dimension a word state may be materialized in.
DEFAULT_MAX_DIM = 4096
MAX_DIM_ENV = "CQCAP_MAX_DIM"

#: Probabilities at or below this are exact zeros in Shannon sums.
PROB_FLOOR = 1e-15


def default_max_dim() -> int:
    """The dimension cap, honouring the ``CQCAP_MAX_DIM`` environment override."""
    raw = os.environ.get(MAX_DIM_ENV)
    if raw is None:
        return DEFAULT_MAX_DIM
    try:
        value = int(raw)
    except ValueError:
        raise ArgumentError(f"{MAX_DIM_ENV}={raw!r} is not an integer") from None
    if value < 1:
        raise ArgumentError(f"{MAX_DIM_ENV} must be positive, got {value}")
    return value


@dataclass(frozen=True, eq=False)
class CQChannel:
    """A finite alphabet of letters, each mapped to a density operator.

    Build instances with :func:`validate_channel`; the constructor assumes
    its ``states`` are already validated, read-only arrays.
    """

    states: tuple[np.ndarray, ...]
    labels: tuple[str, ...]
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False, compare=False)

    @property
    def a(self) -> int:
        return len(self.states)

    @property
    def d(self) -> int:
        return self.states[0].shape[0]

    @cached_property
    def _spectra(self) -> tuple[SpectralDecomposition, ...]:
        return tuple(spectral_decompose(s, self.tol) for s in self.states)

    def spectra(self) -> list[SpectralDecomposition]:
        return list(self._spectra)

    def entropies(self) -> np.ndarray:
        """Von Neumann entropy of each letter's state, in bits."""
        return np.array([entropy_of_spectrum(s.values, self.tol) for s in self._spectra])


def validate_channel(states: Sequence, labels: Sequence[str] | None = None,
                     tol: Tolerances = DEFAULT_TOL) -> CQChannel:
    """Validate raw signal states and wrap them in a :class:`CQChannel`.

    Every violated invariant of every letter is collected before raising, so
    a single error message lists all problems.
    """
    if len(states) == 0:
        raise ValidationError("a channel needs at least one letter")
    if labels is None:
        labels = [str(i) for i in range(len(states))]
    if len(labels) != len(states):
        raise ArgumentError(f"{len(labels)} labels for {len(states)} states")

    problems = []
    shapes = set()
    for i, (lab, s) in enumerate(zip(labels, states)):
        m = np.asarray(s, dtype=complex)
        shapes.add(m.shape)
        for p in density_violations(m, tol):
            problems.append(f"letter {i} ({lab}): {p}")
    if len(shapes) > 1:
        problems.append(f"letters have different shapes: {sorted(shapes)}")
    if problems:
        raise ValidationError("invalid channel:\n  " + "\n  ".join(problems))
    validated = tuple(validate_density(s, tol, f"letter {i}") for i, s in enumerate(states))
    return CQChannel(validated, tuple(str(x) for x in labels), tol)


def as_prior(weights, a: int | None = None) -> np.ndarray:
    """Validate a probability vector (and its length against ``a``)."""
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValidationError(f"prior must be a non-empty vector, got shape {w.shape}")
    if a is not None and w.size != a:
        raise ArgumentError(f"prior has {w.size} weights but the alphabet has {a} letters")
    if np.any(~np.isfinite(w)) or np.any(w < 0):
        raise ValidationError(f"prior has negative or non-finite weights: {w.tolist()}")
    if abs(w.sum() - 1) > 1e-12:
        raise ValidationError(f"prior sums to {w.sum():.15g}, not 1")
    w = w.copy()
    w.setflags(write=False)
    return w


def uniform_prior(a: int) -> np.ndarray:
    return as_prior(np.full(a, 1.0 / a))


def as_word(letters, a: int) -> tuple[int, ...]:
    word = tuple(int(x) for x in letters)
    if not word:
        raise ArgumentError("a word must have at least one letter")
    bad = [x for x in word if not 0 <= x < a]
    if bad:
        raise ArgumentError(f"letters {bad} outside alphabet of size {a}")
    return word


def average_state(channel: CQChannel, prior) -> np.ndarray:
    """The mixture ``sum_i prior_i S_i``."""
    p = as_prior(prior, channel.a)
    return np.einsum("i,ijk->jk", p, np.stack(channel.states))


def holevo_quantity(channel: CQChannel, prior) -> float:
    """Entropy bound ``H(sum_i p_i S_i) - sum_i p_i H(S_i)`` in bits."""
    p = as_prior(prior, channel.a)
    sbar = average_state(channel, p)
    h_avg = entropy_of_spectrum(np.linalg.eigvalsh(sbar), channel.tol)
    value = h_avg - float(p @ channel.entropies())
    return max(value, 0.0)


def word_state(channel: CQChannel, word, max_dim: int | None = None) -> np.ndarray:
    """Tensor product ``S_{i1} (x) ... (x) S_{in}`` for the word ``(i1, ..., in)``."""
    word = as_word(word, channel.a)
    cap = default_max_dim() if max_dim is None else max_dim
    dim = channel.d ** len(word)
    if dim > cap:
        raise ResourceError(f"word state of dimension {channel.d}^{len(word)} = {dim} exceeds cap {cap}")
    return tensor_product([channel.states[i] for i in word])


def transition_probs(states, povm: ResolutionOfIdentity) -> np.ndarray:
    """Matrix of ``P(j|i) = Tr S_i X_j``; rows are inputs, columns outcomes.

    ``states`` may be a :class:`CQChannel` or any sequence of density matrices
    (for instance word states of a product channel).
    """
    if isinstance(states, CQChannel):
        states = states.states
    mats = np.stack([np.asarray(s, dtype=complex) for s in states])
    if mats.shape[1] != povm.dim:
        raise ArgumentError(f"states have dimension {mats.shape[1]}, POVM has {povm.dim}")
    elems = np.stack(povm.elements)
    probs = np.einsum("ikl,jlk->ij", mats, elems).real
    return np.clip(probs, 0.0, 1.0)


def mutual_information(prior, transitions) -> float:
    """Shannon information between input and outcome, in bits."""
    p = as_prior(prior)
    t = np.asarray(transitions, dtype=float)
    if t.ndim != 2 or t.shape[0] != p.size:
        raise ArgumentError(f"transition matrix of shape {t.shape} does not match prior of length {p.size}")
    joint = p[:, None] * t
    out = joint.sum(axis=0)
    mask = (joint > PROB_FLOOR) & (out[None, :] > PROB_FLOOR)
    ratio = np.where(mask, t / np.where(out > PROB_FLOOR, out, 1.0)[None, :], 1.0)
    value = float(np.sum(np.where(mask, joint * np.log2(ratio), 0.0)))
    return max(value, 0.0)


def product_channel(ch1: CQChannel, ch2: CQChannel) -> CQChannel:
    """Channel on the pair alphabet with states ``S_i (x) S_j``; pairs in row-major order."""
    states = []
    labels = []
    for i, s in enumerate(ch1.states):
        for j, t in enumerate(ch2.states):
            m = np.kron(s, t)
            m.setflags(write=False)
            states.append(m)
            labels.append(f"{ch1.labels[i]},{ch2.labels[j]}")
    return CQChannel(tuple(states), tuple(labels), ch1.tol)
