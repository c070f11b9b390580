"""Random codebooks, the square-root-measurement decoder and its error bounds.

All Hilbert-space work happens inside the typical subspace ``range(P)`` of
``Sbar^(x)n``, using the orthonormal basis ``{|e_J> : J in B}``.  Matrix
elements between product vectors factor over word positions, e.g.

    <e_J | e^u_K> = prod_l <e_{j_l} | e^{u_l}_{k_l}>,

so nothing of size ``d**n`` is ever formed here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .channel import CQChannel, as_prior, average_state, default_max_dim
from .errors import ArgumentError, DegenerateDecoderError, ResourceError
from .operators import gen_inv_sqrt
from .typical import (
    TypicalProjectorDescriptor,
    typical_projector,
    typicality_mass,
    word_typical_projector,
)


@dataclass(frozen=True, eq=False)
class Codebook:
    """``N`` codewords of length ``n``; ``words[k]`` lists the letters of word ``k``."""

    words: np.ndarray
    channel: CQChannel
    seed: int | None = None

    @property
    def N(self) -> int:
        return self.words.shape[0]

    @property
    def n(self) -> int:
        return self.words.shape[1]

    @classmethod
    def from_words(cls, channel: CQChannel, words, seed: int | None = None) -> "Codebook":
        w = np.array(words, dtype=np.int64, ndmin=2)
        if w.size == 0 or w.ndim != 2:
            raise ArgumentError("a codebook needs at least one word of positive length")
        if w.min() < 0 or w.max() >= channel.a:
            raise ArgumentError(f"codebook letters must lie in [0, {channel.a})")
        w.setflags(write=False)
        return cls(w, channel, seed)


def sample_letters(prior, shape, rng: np.random.Generator) -> np.ndarray:
    """Draw i.i.d. letters by inverse CDF over ``prior``."""
    p = as_prior(prior)
    cdf = np.cumsum(p)
    last = int(np.flatnonzero(p > 0)[-1])
    cdf[last:] = 1.0
    return np.searchsorted(cdf, rng.random(shape), side="right")


def sample_codebook(channel: CQChannel, prior, n: int, N: int, seed: int) -> Codebook:
    """``N`` words of ``n`` letters, every letter drawn independently from ``prior``.

    Deterministic given ``seed`` (numpy's PCG64 via ``default_rng``).
    """
    if n < 1 or N < 1:
        raise ArgumentError(f"need n >= 1 and N >= 1, got n={n}, N={N}")
    p = as_prior(prior, channel.a)
    rng = np.random.default_rng(seed)
    return Codebook.from_words(channel, sample_letters(p, (N, n), rng), seed)


class _Frame:
    # shared geometry: the typical subspace of Sbar^(x)n and each word's typical set in it

    def __init__(self, codebook: Codebook, prior, delta: float, delta_word: float | None,
                 max_dim: int | None):
        ch = codebook.channel
        self.codebook = codebook
        self.prior = as_prior(prior, ch.a)
        self.delta = float(delta)
        self.delta_word = float(delta if delta_word is None else delta_word)
        cap = default_max_dim() if max_dim is None else max_dim
        if ch.d ** codebook.n > cap:
            raise ResourceError(f"decoder dimension {ch.d}^{codebook.n} = {ch.d ** codebook.n} exceeds cap {cap}")
        self.P = typical_projector(average_state(ch, self.prior), codebook.n, self.delta, ch.tol)
        self.basis = self.P.indices(max_rows=cap)
        E = self.P.spectra[0].vectors
        spectra = ch.spectra()
        # overlap[i][j, k] = <e_j | e^i_k>, letter[i] = S_i in the Sbar eigenbasis
        self.overlap = [E.conj().T @ s.vectors for s in spectra]
        self.letter = [E.conj().T @ S @ E for S in ch.states]
        self._word_sets: dict[tuple[int, ...], TypicalProjectorDescriptor] = {}

    @property
    def rank(self) -> int:
        return self.basis.shape[0]

    def word_set(self, word) -> TypicalProjectorDescriptor:
        key = tuple(int(x) for x in word)
        if key not in self._word_sets:
            self._word_sets[key] = word_typical_projector(
                self.codebook.channel, key, self.prior, self.delta_word)
        return self._word_sets[key]

    def coords(self, word) -> np.ndarray:
        """Coordinates of ``P|e^u_K>``, ``K in B_u``, as an ``rank x |B_u|`` matrix."""
        K = self.word_set(word).indices()
        J = self.basis
        out = np.ones((J.shape[0], K.shape[0]), dtype=complex)
        for l, i in enumerate(word):
            out *= self.overlap[i][np.ix_(J[:, l], K[:, l])]
        return out

    def compressed_state(self, word) -> np.ndarray:
        """``P S_u P`` restricted to range(P)."""
        J = self.basis
        out = np.ones((J.shape[0], J.shape[0]), dtype=complex)
        for l, i in enumerate(word):
            out *= self.letter[i][np.ix_(J[:, l], J[:, l])]
        return out

    def word_mass(self, word) -> float:
        return typicality_mass(self.word_set(word))


@dataclass(frozen=True, eq=False)
class SQMDecoder:
    """Square-root measurement restricted to the typical subspace.

    ``factors[u]`` is ``T^{-1/2} C_u`` where ``C_u`` holds the projected word
    vectors and ``T = sum_u C_u C_u^+``; the POVM element is
    ``X_u = factors[u] @ factors[u]^+`` in the compressed basis.
    """

    codebook: Codebook
    typical: TypicalProjectorDescriptor
    basis_indices: np.ndarray
    factors: tuple[np.ndarray, ...]
    frame: _Frame = field(repr=False)

    @property
    def rank(self) -> int:
        return self.basis_indices.shape[0]

    @cached_property
    def elements(self) -> tuple[np.ndarray, ...]:
        return tuple(k @ k.conj().T for k in self.factors)

    def completion(self) -> np.ndarray:
        """The inconclusive outcome ``I - sum_u X_u`` on range(P)."""
        return np.eye(self.rank) - sum(self.elements)

    def embedding(self, max_dim: int | None = None) -> np.ndarray:
        """Isometry from the compressed basis into the full ``d**n`` space."""
        return self.typical.vectors(self.basis_indices, max_dim=max_dim)

    def full_elements(self, max_dim: int | None = None) -> list[np.ndarray]:
        v = self.embedding(max_dim)
        return [v @ x @ v.conj().T for x in self.elements]

    def violations(self) -> dict:
        """Largest departures from positivity and from ``sum_u X_u <= I``."""
        min_elem = min(float(np.linalg.eigvalsh(x)[0]) for x in self.elements)
        min_rest = float(np.linalg.eigvalsh(self.completion())[0])
        return {"min_element_eigenvalue": min_elem, "min_completion_eigenvalue": min_rest}


def sqm_decoder(codebook: Codebook, prior, delta: float, delta_word: float | None = None,
                max_dim: int | None = None) -> SQMDecoder:
    """Build ``X_u = T^{-1/2} P P_u P T^{-1/2}`` with ``T = sum_u P P_u P``.

    ``P`` is the typical projector of ``Sbar^(x)n`` and ``P_u`` that of the
    word state; both use ``delta`` unless ``delta_word`` is given.  Outcomes
    outside ``{X_u}`` are inconclusive and count as errors.
    """
    frame = _Frame(codebook, prior, delta, delta_word, max_dim)
    if frame.rank == 0:
        raise DegenerateDecoderError(
            f"typical subspace of Sbar^(x){codebook.n} is empty at delta={delta}")
    coords = [frame.coords(w) for w in codebook.words]
    T = sum(c @ c.conj().T for c in coords)
    root = gen_inv_sqrt(T, codebook.channel.tol)
    factors = tuple(root @ c for c in coords)
    return SQMDecoder(codebook, frame.P, frame.basis, factors, frame)


def average_error_probability(codebook: Codebook, decoder: SQMDecoder) -> float:
    """``(1/N) sum_u [1 - Tr S_u X_u]``, computed in the compressed basis."""
    if decoder.codebook is not codebook and not (
        decoder.codebook.channel is codebook.channel
        and np.array_equal(decoder.codebook.words, codebook.words)
    ):
        raise ArgumentError("decoder was built for a different codebook")
    frame = decoder.frame
    total = 0.0
    for word, k in zip(codebook.words, decoder.factors):
        s = frame.compressed_state(word)
        total += 1.0 - float(np.einsum("am,ab,bm->", k.conj(), s, k).real)
    return float(np.clip(total / codebook.N, 0.0, 1.0))


@dataclass(frozen=True)
class ErrorBoundBreakdown:
    """Per-codeword terms of the deterministic error bound.

    ``total_bound`` is the mean over words of
    ``3 * atypical_global + cross + atypical_word``.
    """

    atypical_global: np.ndarray
    cross: np.ndarray
    atypical_word: np.ndarray

    @property
    def per_word(self) -> np.ndarray:
        return 3 * self.atypical_global + self.cross + self.atypical_word

    @property
    def total_bound(self) -> float:
        return float(np.mean(self.per_word))

    def to_dict(self) -> dict:
        return {
            "atypical_global": self.atypical_global.tolist(),
            "cross": self.cross.tolist(),
            "atypical_word": self.atypical_word.tolist(),
            "total_bound": self.total_bound,
        }


def error_bound_eq17(codebook: Codebook, prior, delta: float, delta_word: float | None = None,
                     max_dim: int | None = None) -> ErrorBoundBreakdown:
    """Evaluate the upper bound on the square-root decoder's error exactly.

    Terms per word ``u``: ``Tr S_u (I - P)``, ``sum_{u' != u} Tr P S_u P P_u'``
    and ``Tr S_u (I - P_u)``.
    """
    frame = _Frame(codebook, prior, delta, delta_word, max_dim)
    N = codebook.N
    glob = np.zeros(N)
    cross = np.zeros(N)
    word = np.zeros(N)
    if frame.rank == 0:
        glob[:] = 1.0
        word[:] = [1.0 - frame.word_mass(w) for w in codebook.words]
        return ErrorBoundBreakdown(glob, cross, word)

    coords = [frame.coords(w) for w in codebook.words]
    T = sum(c @ c.conj().T for c in coords)
    for u, w in enumerate(codebook.words):
        s = frame.compressed_state(w)
        glob[u] = 1.0 - float(np.trace(s).real)
        own = float(np.einsum("am,ab,bm->", coords[u].conj(), s, coords[u]).real)
        cross[u] = float(np.einsum("ab,ba->", s, T).real) - own
        word[u] = 1.0 - frame.word_mass(w)
    # rounding can leave tiny negatives on terms that are exactly zero
    return ErrorBoundBreakdown(np.maximum(glob, 0.0), np.maximum(cross, 0.0), np.maximum(word, 0.0))
