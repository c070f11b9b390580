"""Typical subspaces of product density operators.

A product operator ``rho_1 (x) ... (x) rho_n`` has eigenvalues
``lambda_J = prod_l lambda^{(l)}_{j_l}`` indexed by multi-indices ``J``.
The typical index set keeps the ``J`` with

    n (center - delta) < -log2 lambda_J < n (center + delta)

(strict on both sides, zero eigenvalues never included).  Whether ``J``
belongs to the set depends only on its *type*: how often each eigenvalue
index occurs among the positions that share a factor.  Everything here is
therefore computed per type class, and multi-indices are only listed when a
caller asks for them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.special import gammaln, logsumexp

from .channel import CQChannel, as_prior, as_word, average_state, default_max_dim
from .errors import ArgumentError, ResourceError
from .operators import DEFAULT_TOL, SpectralDecomposition, Tolerances, entropy_of_spectrum, spectral_decompose

LN2 = np.log(2.0)


def compositions(total: int, parts: int) -> np.ndarray:
    """All non-negative integer vectors of length ``parts`` summing to ``total``."""
    if parts == 0:
        return np.zeros((1 if total == 0 else 0, 0), dtype=np.int64)
    rows = []
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        edges = (-1,) + bars + (total + parts - 1,)
        rows.append([edges[k + 1] - edges[k] - 1 for k in range(parts)])
    return np.array(rows, dtype=np.int64).reshape(-1, parts)


def log2_multinomial(counts: np.ndarray) -> np.ndarray:
    """``log2`` of the multinomial coefficient, row-wise."""
    counts = np.atleast_2d(counts)
    n = counts.sum(axis=1)
    return (gammaln(n + 1) - gammaln(counts + 1).sum(axis=1)) / LN2


@lru_cache(maxsize=4096)
def _arrangements(counts: tuple[int, ...]) -> np.ndarray:
    # every distinct sequence with the given symbol counts, in lexicographic order
    m = sum(counts)
    if m == 0:
        return np.zeros((1, 0), dtype=np.int64)
    blocks = []
    for j, c in enumerate(counts):
        if c == 0:
            continue
        rest = list(counts)
        rest[j] -= 1
        tail = _arrangements(tuple(rest))
        head = np.full((tail.shape[0], 1), j, dtype=np.int64)
        blocks.append(np.hstack([head, tail]))
    return np.vstack(blocks)


@dataclass(frozen=True)
class TypicalProjectorDescriptor:
    """Index set of a typical subspace together with the basis it refers to.

    Attributes
    ----------
    n, delta, center
        Word length, window half-width (bits per symbol) and the entropy the
        window is centred on.
    spectra
        One spectral decomposition per *group*: positions sharing the same
        factor operator.
    positions
        ``positions[g]`` lists the word positions using ``spectra[g]``.
    types
        Accepted type classes, shape ``(T, G, d)``: ``types[t, g, j]`` is
        how often eigenvalue index ``j`` of group ``g`` occurs.
    """

    n: int
    delta: float
    center: float
    spectra: tuple[SpectralDecomposition, ...]
    positions: tuple[tuple[int, ...], ...]
    types: np.ndarray
    tol: Tolerances = DEFAULT_TOL

    @property
    def d(self) -> int:
        return self.spectra[0].dim

    @property
    def full_dim(self) -> int:
        return self.d ** self.n

    def eigenvalues_by_group(self) -> list[np.ndarray]:
        return [np.where(s.values > self.tol.psd, s.values, 0.0) for s in self.spectra]

    def type_log2_sizes(self) -> np.ndarray:
        """``log2`` of the number of multi-indices in each accepted type class."""
        if len(self.types) == 0:
            return np.zeros(0)
        return sum(log2_multinomial(self.types[:, g, :]) for g in range(len(self.spectra)))

    @property
    def rank(self) -> int:
        """Dimension of the typical subspace, i.e. the size of the index set."""
        if len(self.types) == 0:
            return 0
        return int(round(float(np.sum(np.exp2(self.type_log2_sizes())))))

    def indices(self, max_rows: int | None = None) -> np.ndarray:
        """List the multi-indices ``J`` of the set, sorted lexicographically.

        Row ``k`` holds the eigenvalue index used at each word position.
        """
        cap = default_max_dim() if max_rows is None else max_rows
        if self.rank > cap:
            raise ResourceError(f"typical index set has {self.rank} elements, above cap {cap}")
        chunks = []
        for t in self.types:
            parts = [_arrangements(tuple(int(c) for c in t[g])) for g in range(len(self.spectra))]
            sizes = [p.shape[0] for p in parts]
            rows = np.zeros((int(np.prod(sizes)), self.n), dtype=np.int64)
            for combo_idx, combo in enumerate(itertools.product(*[range(s) for s in sizes])):
                for g, pos in enumerate(self.positions):
                    rows[combo_idx, list(pos)] = parts[g][combo[g]]
            chunks.append(rows)
        if not chunks:
            return np.zeros((0, self.n), dtype=np.int64)
        out = np.vstack(chunks)
        return out[np.lexsort(out.T[::-1])]

    def group_of_position(self) -> np.ndarray:
        g_of = np.empty(self.n, dtype=np.int64)
        for g, pos in enumerate(self.positions):
            g_of[list(pos)] = g
        return g_of

    def eigenvalues(self, indices: np.ndarray | None = None) -> np.ndarray:
        """Product eigenvalues ``lambda_J`` for the listed multi-indices."""
        J = self.indices() if indices is None else indices
        lam = self.eigenvalues_by_group()
        g_of = self.group_of_position()
        out = np.ones(J.shape[0])
        for l in range(self.n):
            out = out * lam[g_of[l]][J[:, l]]
        return out

    def vectors(self, indices: np.ndarray | None = None, max_dim: int | None = None) -> np.ndarray:
        """Columns ``|e_J> = |e_{j1}> (x) ... (x) |e_{jn}>`` in the full space."""
        cap = default_max_dim() if max_dim is None else max_dim
        if self.full_dim > cap:
            raise ResourceError(f"dimension {self.d}^{self.n} = {self.full_dim} exceeds cap {cap}")
        J = self.indices() if indices is None else indices
        g_of = self.group_of_position()
        return kron_columns([self.spectra[g_of[l]].vectors for l in range(self.n)], J)

    def projector(self, max_dim: int | None = None) -> np.ndarray:
        v = self.vectors(max_dim=max_dim)
        return v @ v.conj().T


def kron_columns(bases: Sequence[np.ndarray], J: np.ndarray) -> np.ndarray:
    """Columns ``bases[0][:, J[k,0]] (x) ... (x) bases[n-1][:, J[k,n-1]]`` for every row ``k``."""
    cols = np.ones((1, J.shape[0]), dtype=complex)
    for l, basis in enumerate(bases):
        picked = basis[:, J[:, l]]
        cols = (cols[:, None, :] * picked[None, :, :]).reshape(cols.shape[0] * basis.shape[0], J.shape[0])
    return cols


def _accepted_types(groups_log2: list[np.ndarray], sizes: list[int], n: int,
                    center: float, delta: float, d: int) -> np.ndarray:
    # enumerate type classes over nonzero eigenvalues of each group, keep those in the window
    per_group = []
    for log2_lam, m in zip(groups_log2, sizes):
        support = np.flatnonzero(np.isfinite(log2_lam))
        comp = compositions(m, support.size)
        full = np.zeros((comp.shape[0], d), dtype=np.int64)
        full[:, support] = comp
        score = -(comp @ log2_lam[support]) if support.size else np.zeros(comp.shape[0])
        per_group.append((full, score))

    lo, hi = n * (center - delta), n * (center + delta)
    idx_grids = np.meshgrid(*[np.arange(len(s)) for _, s in per_group], indexing="ij")
    idx = [g.ravel() for g in idx_grids]
    total = sum(per_group[g][1][idx[g]] for g in range(len(per_group)))
    keep = (total > lo) & (total < hi)
    if not np.any(keep):
        return np.zeros((0, len(per_group), d), dtype=np.int64)
    return np.stack([per_group[g][0][idx[g][keep]] for g in range(len(per_group))], axis=1)


def _safe_log2(values: np.ndarray, tol: Tolerances) -> np.ndarray:
    out = np.full(values.shape, -np.inf)
    pos = values > tol.psd
    out[pos] = np.log2(values[pos])
    return out


def typical_projector(sbar, n: int, delta: float, tol: Tolerances = DEFAULT_TOL) -> TypicalProjectorDescriptor:
    """Typical subspace of ``sbar``'s n-fold tensor power, centred on ``H(sbar)``."""
    if delta <= 0:
        raise ArgumentError(f"delta must be positive, got {delta}")
    if n < 1:
        raise ArgumentError(f"n must be at least 1, got {n}")
    spec = spectral_decompose(sbar, tol)
    center = entropy_of_spectrum(spec.values, tol)
    types = _accepted_types([_safe_log2(spec.values, tol)], [n], n, center, delta, spec.dim)
    return TypicalProjectorDescriptor(n, float(delta), center, (spec,), (tuple(range(n)),), types, tol)


def word_typical_projector(channel: CQChannel, word, prior, delta: float) -> TypicalProjectorDescriptor:
    """Typical subspace of the word state, centred on the average letter entropy.

    The centre is ``sum_i prior_i H(S_i)``, not the word's own entropy per
    symbol.
    """
    if delta <= 0:
        raise ArgumentError(f"delta must be positive, got {delta}")
    word = as_word(word, channel.a)
    p = as_prior(prior, channel.a)
    spectra = channel.spectra()
    center = float(p @ channel.entropies())
    letters = sorted(set(word))
    positions = tuple(tuple(l for l, x in enumerate(word) if x == i) for i in letters)
    specs = tuple(spectra[i] for i in letters)
    types = _accepted_types([_safe_log2(s.values, channel.tol) for s in specs],
                            [len(p_) for p_ in positions], len(word), center, delta, channel.d)
    return TypicalProjectorDescriptor(len(word), float(delta), center, specs, positions, types, channel.tol)


def typicality_mass(descriptor: TypicalProjectorDescriptor, weights=None) -> float:
    """Probability ``sum_{J in B} prod_l w_{g(l)}[j_l]`` of the typical index set.

    With the default weights (the descriptor's own eigenvalues) this is
    ``Tr rho P`` for the product operator ``rho`` the set was built from.
    ``weights`` may be one vector (shared by every group) or one per group.
    """
    G = len(descriptor.spectra)
    if weights is None:
        w = descriptor.eigenvalues_by_group()
    else:
        arr = np.asarray(weights, dtype=float)
        w = [arr] * G if arr.ndim == 1 else list(arr)
        if len(w) != G or any(x.shape != (descriptor.d,) for x in w):
            raise ArgumentError(f"weights must give {G} vector(s) of length {descriptor.d}")
    if len(descriptor.types) == 0:
        return 0.0
    log_terms = descriptor.type_log2_sizes() * LN2
    for g in range(G):
        k = descriptor.types[:, g, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            lw = np.log(w[g])
            contrib = np.where(k > 0, k * lw[None, :], 0.0).sum(axis=1)
        log_terms = log_terms + contrib
    if np.all(np.isneginf(log_terms)):
        return 0.0
    return float(min(np.exp(logsumexp(log_terms)), 1.0))


def expected_word_typicality(channel: CQChannel, prior, n: int, delta: float) -> float:
    """Average of ``Tr S_u P_u`` over words drawn i.i.d. from ``prior``.

    Each position contributes an independent pair ``(i, j)`` with probability
    ``prior_i * lambda^i_j``; the result is the probability that the
    summed log-eigenvalues fall in the window, enumerated by type class over
    the pair alphabet.
    """
    if delta <= 0:
        raise ArgumentError(f"delta must be positive, got {delta}")
    p = as_prior(prior, channel.a)
    center = float(p @ channel.entropies())
    lam = np.array([np.where(s.values > channel.tol.psd, s.values, 0.0) for s in channel.spectra()])
    prob = (p[:, None] * lam).ravel()
    score = np.full(prob.shape, np.inf)
    lam_flat = lam.ravel()
    pos = (prob > 0)
    score[pos] = -np.log2(lam_flat[pos])
    outcomes = np.flatnonzero(pos)
    comp = compositions(n, outcomes.size)
    s = comp @ score[outcomes]
    keep = (s > n * (center - delta)) & (s < n * (center + delta))
    if not np.any(keep):
        return 0.0
    comp = comp[keep]
    log_terms = log2_multinomial(comp) * LN2 + comp @ np.log(prob[outcomes])
    return float(min(np.exp(logsumexp(log_terms)), 1.0))


def average_state_typical(channel: CQChannel, prior, n: int, delta: float) -> TypicalProjectorDescriptor:
    """Typical projector of the prior's average state (convenience wrapper)."""
    return typical_projector(average_state(channel, prior), n, delta, channel.tol)
