import math

import numpy as np
import pytest

from cqcap.coding import average_error_probability, error_bound_eq17, sample_codebook, sqm_decoder
from cqcap.errors import ArgumentError, ResourceError
from cqcap.experiment import (
    codebook_size,
    derive_seed,
    monte_carlo_experiment,
    random_coding_bound,
)
from cqcap.random_states import random_channel
from oracles import h2, random_coding_formula


class TestRandomCodingBound:
    def test_example(self):
        chi = h2(0.25)
        got = random_coding_bound(chi, 0.0, 20, 256, 0.1, 0.01)
        assert got == pytest.approx(random_coding_formula(chi, 0.0, 20, 256, 0.1, 0.01), rel=1e-12)
        assert got == pytest.approx(0.09324503996234859, rel=1e-12)

    def test_single_word(self):
        assert random_coding_bound(1.0, 0.2, 7, 1, 0.1, 0.03) == pytest.approx(0.12)

    @pytest.mark.parametrize("N", [1, 2, 16, 1000])
    def test_monotone_in_N(self, N):
        assert random_coding_bound(0.8, 0.1, 10, N, 0.1, 0.01) <= random_coding_bound(
            0.8, 0.1, 10, N + 1, 0.1, 0.01)

    @pytest.mark.parametrize("delta", [0.01, 0.1, 0.3])
    def test_monotone_in_delta(self, delta):
        assert random_coding_bound(0.8, 0.1, 10, 64, delta, 0.01) <= random_coding_bound(
            0.8, 0.1, 10, 64, delta + 0.05, 0.01)

    def test_may_exceed_one(self):
        assert random_coding_bound(0.3, 0.2, 10, 1024, 0.2, 0.01) > 1

    @pytest.mark.parametrize("args", [(0, 1, 0.1, 0.1), (1, 0, 0.1, 0.1), (1, 1, 0.0, 0.1), (1, 1, 0.1, 0.0)])
    def test_bad_args(self, args):
        with pytest.raises(ArgumentError):
            random_coding_bound(1.0, 0.0, *args)


class TestSeeding:
    def test_rule(self):
        ss = np.random.SeedSequence(entropy=42, spawn_key=(3,))
        assert derive_seed(42, 3) == int(ss.generate_state(1, dtype=np.uint32)[0])

    def test_distinct(self):
        assert len({derive_seed(0, t) for t in range(100)}) == 100


class TestCodebookSize:
    @pytest.mark.parametrize("n,rate,expected", [(4, 0.4, 4), (10, 0.4, 16), (5, 0.4, 4), (8, 0.5, 16), (3, 0.0, 1)])
    def test_rate(self, n, rate, expected):
        assert codebook_size(n, rate=rate) == expected == max(1, math.ceil(round(2 ** (rate * n), 9)))

    def test_exactly_one(self):
        with pytest.raises(ArgumentError):
            codebook_size(4)
        with pytest.raises(ArgumentError):
            codebook_size(4, rate=0.4, N=3)


class TestMonteCarlo:
    def test_single_trial_composition(self, overlap_half):
        rep = monte_carlo_experiment(overlap_half, [0.5, 0.5], 4, N=3, delta=0.3, trials=1, seed=9)
        seed = derive_seed(9, 0)
        cb = sample_codebook(overlap_half, [0.5, 0.5], 4, 3, seed)
        p = average_error_probability(cb, sqm_decoder(cb, [0.5, 0.5], 0.3))
        assert rep.trials[0].seed == seed
        assert rep.trials[0].p_err == p
        assert rep.trials[0].bound17 == error_bound_eq17(cb, [0.5, 0.5], 0.3).total_bound
        assert rep.mean_p_err == p

    def test_deterministic(self, overlap_half):
        a = monte_carlo_experiment(overlap_half, [0.5, 0.5], 5, rate=0.4, trials=4, seed=3)
        b = monte_carlo_experiment(overlap_half, [0.5, 0.5], 5, rate=0.4, trials=4, seed=3)
        assert a.to_dict() == b.to_dict()

    def test_workers_do_not_change_results(self, overlap_half):
        a = monte_carlo_experiment(overlap_half, [0.5, 0.5], 5, rate=0.4, trials=6, seed=1)
        b = monte_carlo_experiment(overlap_half, [0.5, 0.5], 5, rate=0.4, trials=6, seed=1, workers=3)
        assert a.to_dict() == b.to_dict()

    def test_per_trial_bound(self, rng):
        ch = random_channel(2, 2, rng)
        rep = monte_carlo_experiment(ch, [0.5, 0.5], 4, N=4, delta=0.2, trials=8, seed=2)
        for t in rep.trials:
            assert t.p_err <= t.bound17 + 1e-9

    def test_degenerate_trials_count_as_errors(self, overlap_half):
        rep = monte_carlo_experiment(overlap_half, [0.5, 0.5], 6, rate=0.4, delta=0.1, trials=2, seed=0)
        assert all(t.degenerate and t.p_err == 1.0 for t in rep.trials)

    def test_report_fields(self, overlap_half):
        rep = monte_carlo_experiment(overlap_half, [0.5, 0.5], 4, rate=0.4, trials=3, seed=0)
        d = rep.to_dict()
        assert d["config"]["N"] == 4
        assert d["entropies"]["chi"] == pytest.approx(h2(0.25), abs=1e-9)
        assert d["mean_p_err"] == pytest.approx(np.mean([t["p_err"] for t in d["trials"]]), abs=1e-12)
        assert "elapsed" not in d
        assert 0.0 <= d["typicality"]["epsilon_needed"] <= 1.0

    def test_cap_checked_first(self, overlap_half):
        with pytest.raises(ResourceError):
            monte_carlo_experiment(overlap_half, [0.5, 0.5], 13, N=2)

    @pytest.mark.parametrize("kw", [{"trials": 0}, {"delta": 0.0}, {"epsilon": -1.0}])
    def test_bad_arguments(self, overlap_half, kw):
        with pytest.raises(ArgumentError):
            monte_carlo_experiment(overlap_half, [0.5, 0.5], 3, N=2, **kw)
