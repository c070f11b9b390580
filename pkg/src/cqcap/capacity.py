"""Capacity of a classical-quantum channel as the maximized entropy bound.

The maximization over priors is a concave program on the simplex.  It is
solved by a Blahut-Arimoto style multiplicative update

    p_i <- p_i * 2**D(S_i || Sbar_p) / Z,

whose fixed points satisfy the Karush-Kuhn-Tucker conditions.  Because the
entropy bound equals ``sum_i p_i D(S_i || Sbar_p)`` and the capacity is at
most ``max_i D(S_i || Sbar_p)`` for *every* prior ``p``, the difference of
the two is a computable optimality gap.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

import numpy as np

from .channel import CQChannel, as_prior, default_max_dim, holevo_quantity, product_channel
from .errors import ArgumentError, ResourceError
from .operators import entropy_of_spectrum

log = logging.getLogger(__name__)

DEFAULT_CAPACITY_TOL = 1e-7
DEFAULT_MAX_ITERS = 10_000
WEIGHT_FLOOR = 1e-12
ACTIVE_WEIGHT = 1e-6


@dataclass(frozen=True)
class CapacityResult:
    optimal_prior: np.ndarray
    capacity: float
    optimality_gap: float
    iterations: int
    converged: bool
    divergences: np.ndarray

    def to_dict(self) -> dict:
        return {
            "capacity": self.capacity,
            "optimal_prior": [float(x) for x in self.optimal_prior],
            "optimality_gap": self.optimality_gap,
            "iterations": self.iterations,
            "converged": self.converged,
            "divergences": [float(x) for x in self.divergences],
        }


def letter_divergences(channel: CQChannel, prior, entropies=None) -> np.ndarray:
    """``D(S_i || Sbar)`` for every letter, ``Sbar`` being the prior's mixture.

    Letters whose support leaks outside that of ``Sbar`` get ``inf``.
    """
    p = np.asarray(prior, dtype=float)
    stack = np.stack(channel.states)
    if entropies is None:
        entropies = channel.entropies()
    sbar = np.einsum("i,ijk->jk", p, stack)
    vals, vecs = np.linalg.eigh(sbar)
    keep = vals > channel.tol.kernel * max(float(vals[-1]), 0.0)
    v = vecs[:, keep]
    # diag(V^+ S_i V) gives each letter's weight on the eigenvectors of Sbar
    w = np.einsum("ka,ikl,la->ia", v.conj(), stack, v).real
    cross = w @ np.log2(vals[keep])
    leak = 1.0 - w.sum(axis=1)
    div = -np.asarray(entropies) - cross
    div = np.maximum(div, 0.0)
    div[leak > channel.tol.kernel] = np.inf
    return div


def optimize_prior(channel: CQChannel, tol: float = DEFAULT_CAPACITY_TOL,
                   max_iters: int = DEFAULT_MAX_ITERS) -> CapacityResult:
    """Maximize the entropy bound over priors.

    Stops once ``max_i D(S_i||Sbar) - entropy bound <= tol`` and, for every
    letter of weight above ``1e-6``, ``|D(S_i||Sbar) - entropy bound| <= tol``.
    When ``max_iters`` runs out first, the current iterate is returned with
    ``converged=False``.
    """
    if tol <= 0:
        raise ArgumentError(f"tol must be positive, got {tol}")
    a = channel.a
    ent = channel.entropies()
    p = np.full(a, 1.0 / a)
    it = 0
    while True:
        div = letter_divergences(channel, p, ent)
        bound = float(p @ div)
        gap = float(div.max()) - bound
        active = p > ACTIVE_WEIGHT
        spread = float(np.max(np.abs(div[active] - bound)))
        done = gap <= tol and spread <= tol
        if done or it >= max_iters:
            break
        # letters leaking outside supp(Sbar) are pushed up by a large finite step
        step = np.where(np.isfinite(div), div, np.nanmax(np.where(np.isfinite(div), div, 0.0)) + 64.0)
        # shift by the max exponent to keep 2**x finite
        logw = np.log2(p) + step - step.max()
        p = np.exp2(logw)
        p /= p.sum()
        p = np.maximum(p, WEIGHT_FLOOR)
        p /= p.sum()
        it += 1

    converged = done
    reported = np.where(p <= WEIGHT_FLOOR * (1 + 1e-6), 0.0, p)
    reported /= reported.sum()
    capacity = holevo_quantity(channel, reported)
    upper = float(div.max())
    if not converged:
        log.warning("optimize_prior stopped after %d iterations with gap %.3g", it, gap)
    return CapacityResult(
        optimal_prior=reported,
        capacity=capacity,
        optimality_gap=max(upper - capacity, 0.0),
        iterations=it,
        converged=converged,
        divergences=div,
    )


def simplex_grid(a: int, resolution: int) -> np.ndarray:
    """All priors on ``a`` letters whose weights are multiples of ``1/resolution``."""
    points = []
    for bars in itertools.combinations(range(resolution + a - 1), a - 1):
        edges = (-1,) + bars + (resolution + a - 1,)
        points.append([edges[k + 1] - edges[k] - 1 for k in range(a)])
    return np.array(points, dtype=float) / resolution


def grid_search_capacity(channel: CQChannel, resolution: int = 100,
                         return_prior: bool = False):
    """Brute-force maximum of the entropy bound over a simplex grid.

    Independent of :func:`optimize_prior`; the result is a lower bound on
    the capacity.  Only alphabets of up to three letters are accepted.
    """
    if channel.a > 3:
        raise ArgumentError(
            f"grid search supports at most 3 letters (got {channel.a}); use optimize_prior"
        )
    if resolution < 10:
        raise ArgumentError(f"resolution must be at least 10, got {resolution}")
    grid = simplex_grid(channel.a, resolution)
    stack = np.stack(channel.states)
    mixtures = np.einsum("gi,ijk->gjk", grid, stack)
    spectra = np.linalg.eigvalsh(mixtures)
    h_mix = np.array([entropy_of_spectrum(s, channel.tol) for s in spectra])
    values = h_mix - grid @ channel.entropies()
    best = int(np.argmax(values))
    value = max(float(values[best]), 0.0)
    if return_prior:
        return value, as_prior(grid[best])
    return value


@dataclass(frozen=True)
class AdditivityReport:
    c1: float
    c2: float
    c_product: float
    defect: float
    product_result: CapacityResult

    def to_dict(self) -> dict:
        return {
            "C1": self.c1,
            "C2": self.c2,
            "C_product": self.c_product,
            "defect": self.defect,
            "product_prior": [float(x) for x in self.product_result.optimal_prior],
        }


def additivity_check(ch1: CQChannel, ch2: CQChannel, tol: float = DEFAULT_CAPACITY_TOL,
                     max_iters: int = DEFAULT_MAX_ITERS, max_dim: int | None = None) -> AdditivityReport:
    """Compare the capacity of the product channel (joint priors) with ``C1 + C2``."""
    cap = default_max_dim() if max_dim is None else max_dim
    if ch1.d * ch2.d > cap:
        raise ResourceError(f"product dimension {ch1.d * ch2.d} exceeds cap {cap}")
    r1 = optimize_prior(ch1, tol, max_iters)
    r2 = optimize_prior(ch2, tol, max_iters)
    rp = optimize_prior(product_channel(ch1, ch2), tol, max_iters)
    return AdditivityReport(
        c1=r1.capacity,
        c2=r2.capacity,
        c_product=rp.capacity,
        defect=abs(rp.capacity - r1.capacity - r2.capacity),
        product_result=rp,
    )
