"""Random-coding experiments with the square-root decoder.

Seeding: a master seed ``s`` yields the per-trial seed for trial ``t`` as
``SeedSequence(entropy=s, spawn_key=(t,)).generate_state(1, uint32)[0]``.
This rule is fixed; changing it would change every published report.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import CQChannel, as_prior, average_state, default_max_dim
from .coding import average_error_probability, error_bound_eq17, sample_codebook, sqm_decoder
from .errors import ArgumentError, DegenerateDecoderError, ResourceError
from .operators import entropy_of_spectrum
from .typical import expected_word_typicality, typical_projector, typicality_mass


def random_coding_bound(h_avg: float, h_cond: float, n: int, N: int, delta: float,
                        epsilon: float) -> float:
    """``4 eps + (N - 1) 2**(-n (h_avg - h_cond - 2 delta))``.

    ``h_avg`` is the entropy of the average state and ``h_cond`` the
    prior-weighted mean letter entropy.  The value may exceed 1.
    """
    if n < 1 or N < 1 or delta <= 0 or epsilon <= 0:
        raise ArgumentError("need n >= 1, N >= 1, delta > 0 and epsilon > 0")
    return 4 * epsilon + (N - 1) * 2.0 ** (-n * (h_avg - h_cond - 2 * delta))


def derive_seed(master: int, index: int) -> int:
    ss = np.random.SeedSequence(entropy=int(master), spawn_key=(int(index),))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def codebook_size(n: int, rate: float | None = None, N: int | None = None) -> int:
    """``N`` itself, or ``ceil(2**(rate * n))`` when a rate is given."""
    if (rate is None) == (N is None):
        raise ArgumentError("give exactly one of rate and N")
    if N is not None:
        if N < 1:
            raise ArgumentError(f"N must be at least 1, got {N}")
        return int(N)
    if rate < 0:
        raise ArgumentError(f"rate must be non-negative, got {rate}")
    # absorb rounding in rate * n before taking the ceiling
    return max(1, math.ceil(2.0 ** (rate * n) - 1e-9))


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    seed: int
    p_err: float
    bound17: float
    degenerate: bool


@dataclass(frozen=True)
class SimulationReport:
    """Outcome of :func:`monte_carlo_experiment`.

    ``elapsed`` is wall-clock time and is left out of :meth:`to_dict` so that
    structured reports depend only on the inputs.
    """

    config: dict
    trials: tuple[TrialRecord, ...]
    bound18: float
    entropies: dict
    typicality: dict
    elapsed: float = field(default=0.0, compare=False)

    @property
    def p_errs(self) -> np.ndarray:
        return np.array([t.p_err for t in self.trials])

    @property
    def mean_p_err(self) -> float:
        return float(np.mean(self.p_errs))

    @property
    def stderr_p_err(self) -> float:
        if len(self.trials) < 2:
            return 0.0
        return float(np.std(self.p_errs, ddof=1) / math.sqrt(len(self.trials)))

    @property
    def mean_bound17(self) -> float:
        return float(np.mean([t.bound17 for t in self.trials]))

    def to_dict(self) -> dict:
        return {
            "config": dict(self.config),
            "entropies": dict(self.entropies),
            "typicality": dict(self.typicality),
            "mean_p_err": self.mean_p_err,
            "stderr_p_err": self.stderr_p_err,
            "mean_bound17": self.mean_bound17,
            "bound18": self.bound18,
            "trials": [
                {"trial": t.trial, "seed": t.seed, "p_err": t.p_err,
                 "bound17": t.bound17, "degenerate": t.degenerate}
                for t in self.trials
            ],
        }


def run_trial(channel: CQChannel, prior, n: int, N: int, delta: float, seed: int,
              trial: int = 0, max_dim: int | None = None) -> TrialRecord:
    """One codebook draw: exact square-root-decoder error and the deterministic bound.

    An empty typical subspace leaves every decoder element zero, so the
    error is 1; such trials are flagged ``degenerate``.
    """
    cb = sample_codebook(channel, prior, n, N, seed)
    try:
        dec = sqm_decoder(cb, prior, delta, max_dim=max_dim)
        p_err = average_error_probability(cb, dec)
        degenerate = False
    except DegenerateDecoderError:
        p_err, degenerate = 1.0, True
    bound = error_bound_eq17(cb, prior, delta, max_dim=max_dim).total_bound
    return TrialRecord(trial, seed, p_err, bound, degenerate)


def monte_carlo_experiment(channel: CQChannel, prior, n: int, *, N: int | None = None,
                           rate: float | None = None, delta: float = 0.1, epsilon: float = 0.01,
                           trials: int = 20, seed: int = 0, max_dim: int | None = None,
                           workers: int = 1) -> SimulationReport:
    """Average the exact decoding error over independently drawn codebooks.

    Exactly one of ``N`` and ``rate`` must be given.  Trials may run on
    ``workers`` threads; results are always assembled in trial order.
    """
    p = as_prior(prior, channel.a)
    if n < 1 or trials < 1:
        raise ArgumentError(f"need n >= 1 and trials >= 1, got n={n}, trials={trials}")
    if delta <= 0 or epsilon <= 0:
        raise ArgumentError("delta and epsilon must be positive")
    size = codebook_size(n, rate, N)
    cap = default_max_dim() if max_dim is None else max_dim
    if channel.d ** n > cap:
        raise ResourceError(f"decoder dimension {channel.d}^{n} = {channel.d ** n} exceeds cap {cap}")

    sbar = average_state(channel, p)
    h_avg = entropy_of_spectrum(np.linalg.eigvalsh(sbar), channel.tol)
    h_cond = float(p @ channel.entropies())
    bound18 = random_coding_bound(h_avg, h_cond, n, size, delta, epsilon)
    mass_p = typicality_mass(typical_projector(sbar, n, delta, channel.tol))
    mass_u = expected_word_typicality(channel, p, n, delta)

    start = time.perf_counter()
    seeds = [derive_seed(seed, t) for t in range(trials)]

    def job(t: int) -> TrialRecord:
        return run_trial(channel, p, n, size, delta, seeds[t], t, cap)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(job, range(trials)))
    else:
        records = [job(t) for t in range(trials)]
    elapsed = time.perf_counter() - start

    config = {
        "n": n, "N": size, "rate": rate, "delta": delta, "epsilon": epsilon,
        "trials": trials, "seed": seed, "prior": [float(x) for x in p],
        "channel_labels": list(channel.labels),
    }
    return SimulationReport(
        config=config,
        trials=tuple(records),
        bound18=bound18,
        entropies={"H_avg": h_avg, "H_cond": h_cond, "chi": h_avg - h_cond},
        typicality={
            "mass_P": mass_p,
            "mean_mass_Pu": mass_u,
            # smallest epsilon for which both typicality premises of the bound hold here
            "epsilon_needed": max(1.0 - mass_p, 1.0 - mass_u),
        },
        elapsed=elapsed,
    )
