"""Gram-matrix route to the decoder's error probability.

This recomputes everything from explicit vectors in the full ``d**n``
space: the projected word eigenvectors ``P|e^u_J>``, their Gram matrix
``Gamma`` and the coefficients ``alpha = <e^u_J| P T^{-1/2} P |e^u'_J'>``
obtained as ``<e^u_J|P E_hat> Gamma^{-1/2}``.  It shares no linear algebra
with :mod:`cqcap.coding`, which works with factored matrix elements inside
``range(P)``, so agreement of the two is a real consistency check.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .channel import as_prior, average_state, default_max_dim
from .coding import Codebook, average_error_probability, error_bound_eq17, sqm_decoder
from .errors import ResourceError
from .operators import gen_inv_sqrt, psd_sqrt, support_projector
from .typical import kron_columns, typical_projector, typicality_mass, word_typical_projector

DEFAULT_GRAM_CAP = 8192


@dataclass(frozen=True)
class GramData:
    """Gram matrix of projected word eigenvectors with their eigenvalue weights.

    ``labels[k] = (u, J)`` names row ``k``: codeword index and multi-index.
    """

    gram: np.ndarray
    weights: np.ndarray
    labels: tuple[tuple[int, tuple[int, ...]], ...]


def eq16_sides(gram, weights) -> tuple[float, float]:
    """``Sp L (E - G^{1/2})^2`` and ``Sp L (E - G)^2`` for ``L = diag(weights)``."""
    g = np.asarray(gram, dtype=complex)
    lam = np.asarray(weights, dtype=float)
    if g.size == 0:
        return 0.0, 0.0
    e = np.eye(g.shape[0])
    a = e - psd_sqrt(g)
    b = e - g
    lhs = float(np.real(np.sum(lam * np.einsum("ij,ji->i", a, a))))
    rhs = float(np.real(np.sum(lam * np.einsum("ij,ji->i", b, b))))
    return lhs, rhs


@dataclass(frozen=True)
class CrossCheckReport:
    p_err_operator: float
    p_err_gram: float
    max_diff: float
    alpha_consistency: float
    eq16_lhs: float
    eq16_rhs: float
    eq16_holds: bool
    ladder: dict
    data: GramData

    def to_dict(self) -> dict:
        return {
            "p_err_operator": self.p_err_operator,
            "p_err_gram": self.p_err_gram,
            "max_diff": self.max_diff,
            "alpha_consistency": self.alpha_consistency,
            "eq16_lhs": self.eq16_lhs,
            "eq16_rhs": self.eq16_rhs,
            "eq16_holds": self.eq16_holds,
            "ladder": dict(self.ladder),
        }


def _all_support_indices(spectra, word, tol) -> np.ndarray:
    # every multi-index with a nonzero product eigenvalue, as rows
    ranges = [np.flatnonzero(spectra[i].values > tol.psd) for i in word]
    return np.array(list(itertools.product(*ranges)), dtype=np.int64).reshape(-1, len(word))


def gram_cross_check(codebook: Codebook, prior, delta: float, delta_word: float | None = None,
                     max_dim: int | None = None, gram_cap: int = DEFAULT_GRAM_CAP,
                     eq16_tol: float = 1e-9) -> CrossCheckReport:
    """Compare the operator-form and Gram-form error of the square-root decoder.

    Also evaluates the chain of upper bounds leading to the final
    deterministic bound.  ``ladder`` holds, in order, ``p_err`` and the
    intermediate bounds ``eq13``, ``eq15``, ``eq16``, ``pre17`` and the final
    ``eq17``; each should not exceed the next.
    """
    ch = codebook.channel
    p = as_prior(prior, ch.a)
    dw = delta if delta_word is None else delta_word
    cap = default_max_dim() if max_dim is None else max_dim
    n, N = codebook.n, codebook.N
    if ch.d ** n > cap:
        raise ResourceError(f"dimension {ch.d}^{n} exceeds cap {cap}")

    typ = typical_projector(average_state(ch, p), n, delta, ch.tol)
    V = typ.vectors(max_dim=cap)
    P = V @ V.conj().T
    spectra = ch.spectra()

    word_sets = [word_typical_projector(ch, w, p, dw) for w in codebook.words]
    total = sum(ws.rank for ws in word_sets)
    if total > gram_cap:
        raise ResourceError(f"Gram dimension {total} exceeds cap {gram_cap}")
    vecs, lams, labels, blocks = [], [], [], []
    start = 0
    for u, ws in enumerate(word_sets):
        K = ws.indices(max_rows=cap)
        vecs.append(ws.vectors(K, max_dim=cap))
        lams.append(ws.eigenvalues(K))
        labels.extend((u, tuple(int(x) for x in k)) for k in K)
        blocks.append(slice(start, start + K.shape[0]))
        start += K.shape[0]
    W = np.hstack(vecs) if vecs else np.zeros((ch.d ** n, 0))
    lam = np.concatenate(lams) if lams else np.zeros(0)
    e_hat = P @ W
    gamma = e_hat.conj().T @ e_hat
    gamma = (gamma + gamma.conj().T) / 2
    if gamma.size:
        # principal root with the same kernel cut as the generalized inverse,
        # so that Gamma^{1/2} vanishes exactly on Ker Gamma
        inv_root = gen_inv_sqrt(gamma, ch.tol)
        root = psd_sqrt(gamma) @ support_projector(gamma, ch.tol)
        root = (root + root.conj().T) / 2
    else:
        root = inv_root = np.zeros((0, 0), dtype=complex)

    masses = np.array([typicality_mass(ws) for ws in word_sets])
    p_gram = 0.0
    alpha_dev = 0.0
    for u, w in enumerate(codebook.words):
        blk = blocks[u]
        Jall = _all_support_indices(spectra, w, ch.tol)
        F = kron_columns([spectra[i].vectors for i in w], Jall)
        lamF = np.prod([spectra[i].values[Jall[:, l]] for l, i in enumerate(w)], axis=0)
        alpha = (F.conj().T @ e_hat) @ inv_root[:, blk]
        p_gram += 1.0 - float(np.sum(lamF[:, None] * np.abs(alpha) ** 2))
        # rows inside B_u must reproduce the entries of Gamma^{1/2}
        own = (vecs[u].conj().T @ e_hat) @ inv_root[:, blk]
        if own.size:
            alpha_dev = max(alpha_dev, float(np.max(np.abs(own - root[blk, blk]))))
    p_gram /= N

    if typ.rank:
        decoder = sqm_decoder(codebook, p, delta, delta_word, max_dim=cap)
        p_op = average_error_probability(codebook, decoder)
    else:
        p_op = 1.0

    lhs, rhs = eq16_sides(gamma, lam)
    outside = float(np.sum(1.0 - masses))
    diag_alpha = np.real(np.diag(root))
    eq13 = (float(np.sum(lam * (1 - diag_alpha ** 2))) + outside) / N
    eq15 = (2 * float(np.sum(lam * (1 - diag_alpha))) + outside) / N
    eq16 = (rhs + float(np.sum(lam * (1 - np.real(np.diag(gamma))))) + outside) / N

    # the expression just before the last simplification, in operator form
    I = np.eye(P.shape[0])
    pre17 = 0.0
    proj = [v @ v.conj().T for v in vecs]
    for u, w in enumerate(codebook.words):
        S = _word_state(ch.states, w)
        pre17 += 2 * float(np.trace(S @ (I - P)).real)
        pre17 += float(np.trace(S @ (I - P) @ proj[u] @ (I - P)).real)
        pre17 += sum(float(np.trace(P @ S @ P @ proj[v]).real) for v in range(N) if v != u)
        pre17 += 1.0 - float(masses[u])
    pre17 /= N
    eq17 = error_bound_eq17(codebook, p, delta, delta_word, max_dim=cap).total_bound

    ladder = {"p_err": p_gram, "eq13": eq13, "eq15": eq15, "eq16": eq16, "pre17": pre17, "eq17": eq17}
    return CrossCheckReport(
        p_err_operator=p_op,
        p_err_gram=float(np.clip(p_gram, 0.0, 1.0)),
        max_diff=abs(p_op - p_gram),
        alpha_consistency=alpha_dev,
        eq16_lhs=lhs,
        eq16_rhs=rhs,
        eq16_holds=lhs <= rhs + eq16_tol,
        ladder=ladder,
        data=GramData(gamma, lam, tuple(labels)),
    )


def _word_state(states, word) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for i in word:
        out = np.kron(out, states[i])
    return out
