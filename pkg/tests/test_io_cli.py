import json
import os

import numpy as np
import pytest

from cqcap.cli import ExperimentConfig, UsageError, run_command
from cqcap.errors import CQCapError, ValidationError
from cqcap.experiment import monte_carlo_experiment
from cqcap.io import (
    ChannelFileError,
    TABLE_HEADER,
    atomic_write,
    channel_to_dict,
    emit_report,
    format_sig,
    parse_channel_file,
    read_report,
    write_channel_file,
)
from cqcap.random_states import random_channel
from conftest import bsc, pure_pair


def _dump(ch, path):
    write_channel_file(ch, path)
    return str(path)


@pytest.fixture
def ortho_file(tmp_path, orthogonal_pair):
    return _dump(orthogonal_pair, tmp_path / "ortho.json")


@pytest.fixture
def half_file(tmp_path):
    return _dump(pure_pair(0.5), tmp_path / "half.json")


class TestChannelFiles:
    def test_parse(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({
            "dim": 2,
            "letters": [
                {"label": "zero", "matrix": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]},
                {"label": "plus", "matrix": [[[0.5, 0], [0, -0.5]], [[0, 0.5], [0.5, 0]]]},
            ],
        }))
        ch = parse_channel_file(path)
        assert (ch.a, ch.d) == (2, 2)
        assert ch.labels == ("zero", "plus")
        assert ch.states[1][0, 1] == -0.5j

    def test_round_trip(self, tmp_path, rng):
        ch = random_channel(3, 3, rng)
        back = parse_channel_file(_dump(ch, tmp_path / "r.json"))
        for a, b in zip(ch.states, back.states):
            assert np.abs(a - b).max() <= 1e-12
        assert back.labels == ch.labels

    def test_trace_error_names_letter(self, tmp_path):
        d = channel_to_dict(bsc(0.1))
        d["letters"][1]["label"] = "flip"
        d["letters"][1]["matrix"][1][1][0] -= 0.02
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(d))
        with pytest.raises(ValidationError, match="flip") as info:
            parse_channel_file(path)
        assert "0.02" in str(info.value)

    def test_syntax_error_location(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"dim": 2,\n "letters": [}\n')
        with pytest.raises(ChannelFileError, match="line 2"):
            parse_channel_file(path)

    @pytest.mark.parametrize("data,match", [
        ({"letters": []}, "dim"),
        ({"dim": 2, "letters": []}, "letters"),
        ({"dim": 2, "letters": [{"matrix": [[[1, 0]]]}]}, "row"),
        ({"dim": 1, "letters": [{"matrix": [[[1]]]}]}, r"\[re, im\]"),
    ])
    def test_structure_errors(self, tmp_path, data, match):
        path = tmp_path / "s.json"
        path.write_text(json.dumps(data))
        with pytest.raises(ChannelFileError, match=match):
            parse_channel_file(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ChannelFileError):
            parse_channel_file(tmp_path / "nope.json")


class TestFormatting:
    @pytest.mark.parametrize("x,expected", [
        (0.0669872981077807, "0.0669872981"),
        (1.0, "1.00000000"),
        (123.456, "123.456000"),
        (0.5, "0.500000000"),
        (9.9999999996, "10.0000000"),
        (0.0, "0.00000000"),
        (-2.5e-4, "-0.000250000000"),
        (3.0e9, "3000000000"),
    ])
    def test_nine_significant(self, x, expected):
        assert format_sig(x) == expected

    def test_atomic_write_leaves_no_partial(self, tmp_path, monkeypatch):
        target = tmp_path / "out.txt"
        target.write_text("old")

        def boom(*a, **k):
            raise OSError(28, "No space left on device")

        monkeypatch.setattr(os, "replace", boom)
        with pytest.raises(CQCapError, match="out.txt"):
            atomic_write(target, "new")
        assert target.read_text() == "old"
        assert os.listdir(tmp_path) == ["out.txt"]


@pytest.fixture(scope="module")
def report():
    return monte_carlo_experiment(pure_pair(0.5), [0.5, 0.5], 4, rate=0.4, trials=3, seed=5)


class TestReports:
    def test_one_trial_one_row(self):
        rep = monte_carlo_experiment(pure_pair(0.5), [0.5, 0.5], 3, N=2, trials=1, seed=0)
        lines = emit_report(rep, "csv").splitlines()
        assert lines[0] == ",".join(TABLE_HEADER)
        assert len(lines) == 2

    def test_csv_parse_back(self, report, tmp_path):
        emit_report(report, "csv", tmp_path / "r.csv")
        rows = read_report(tmp_path / "r.csv")
        assert len(rows) == 3

        def close(a, b):
            # half a unit in the ninth significant digit; within 1e-9 for values below 1
            return abs(a - b) <= 5e-9 * max(abs(b), 0.1) + 1e-15

        for row, t in zip(rows, report.trials):
            assert row["seed"] == t.seed and row["trial"] == t.trial
            assert abs(row["p_err"] - t.p_err) <= 1e-9
            assert close(row["bound17"], t.bound17)
            assert close(row["bound18"], report.bound18)

    def test_json_parse_back(self, report, tmp_path):
        emit_report(report, "json", tmp_path / "r.json")
        d = read_report(tmp_path / "r.json")
        assert [t["p_err"] for t in d["trials"]] == [t.p_err for t in report.trials]
        assert d["config"]["seed"] == 5
        assert d["mean_p_err"] == pytest.approx(np.mean([t["p_err"] for t in d["trials"]]), abs=1e-12)


class TestExperimentConfig:
    def base(self, **kw):
        args = dict(channel="c", prior="uniform", n=3, N=2, rate=None, delta=0.1, epsilon=0.01,
                    trials=2, seed=0, out=None, fmt="json", max_dim=4096)
        args.update(kw)
        return ExperimentConfig(**args)

    @pytest.mark.parametrize("kw", [{"n": 0}, {"N": 0}, {"rate": 0.3}, {"delta": 0.0},
                                    {"trials": 0}, {"seed": -1}, {"max_dim": 0}])
    def test_rejects(self, kw):
        with pytest.raises(UsageError):
            self.base(**kw)


class TestCommands:
    def test_capacity_orthogonal(self, ortho_file, capsys):
        assert run_command(["capacity", "--channel", ortho_file]) == 0
        assert capsys.readouterr().out.splitlines()[0] == "1.000000"

    def test_holevo_overlap_half(self, half_file, capsys):
        assert run_command(["holevo", "--channel", half_file, "--prior", "uniform"]) == 0
        assert capsys.readouterr().out.strip() == "0.811278"

    def test_info(self, half_file, capsys):
        assert run_command(["info", "--channel", half_file, "--format", "json"]) == 0
        d = json.loads(capsys.readouterr().out)
        assert d["alphabet_size"] == 2
        assert all(abs(l["entropy"]) < 1e-9 for l in d["letters"])

    def test_typicality(self, tmp_path, capsys):
        path = _dump(bsc(0.3), tmp_path / "b.json")
        assert run_command(["typicality", "--channel", path, "--prior", "1,0",
                            "--n", "10", "--delta", "0.2", "--format", "json"]) == 0
        d = json.loads(capsys.readouterr().out)
        assert d["rank_P"] == 375
        assert d["mass_P"] == pytest.approx(0.7004233214999998, abs=1e-9)

    def test_simulate_byte_identical(self, half_file, tmp_path):
        outs = []
        for k in range(2):
            out = tmp_path / f"s{k}.json"
            argv = ["simulate", "--channel", half_file, "--n", "4", "--rate", "0.4",
                    "--trials", "3", "--seed", "7", "--format", "json", "--out", str(out)]
            assert run_command(argv) == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_simulate_csv(self, half_file, capsys):
        assert run_command(["simulate", "--channel", half_file, "--n", "3", "--N", "2",
                            "--trials", "2", "--format", "csv"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "n,N,delta,trial,seed,p_err,bound17,bound18"
        assert len(lines) == 3

    def test_bound(self, half_file, capsys):
        assert run_command(["bound", "--channel", half_file, "--n", "4", "--N", "3",
                            "--delta", "0.3", "--format", "json"]) == 0
        d = json.loads(capsys.readouterr().out)
        assert d["p_err"] <= d["bound17"]["total_bound"] + 1e-9

    def test_additivity(self, ortho_file, half_file, capsys):
        assert run_command(["additivity", "--channel", ortho_file, "--channel2", half_file,
                            "--format", "json"]) == 0
        d = json.loads(capsys.readouterr().out)
        assert d["defect"] <= 1e-6

    def test_crosscheck(self, half_file, capsys):
        assert run_command(["crosscheck", "--channel", half_file, "--n", "3", "--N", "2",
                            "--delta", "0.3", "--format", "json"]) == 0
        d = json.loads(capsys.readouterr().out)
        assert d["max_diff"] <= 1e-8

    def test_optimal_prior(self, half_file, capsys):
        assert run_command(["holevo", "--channel", half_file, "--prior", "optimal"]) == 0
        assert capsys.readouterr().out.strip() == "0.811278"

    @pytest.mark.parametrize("argv", [
        [],
        ["bogus"],
        ["capacity"],
        ["simulate", "--channel", "x", "--n", "3"],
        ["simulate", "--channel", "x", "--n", "3", "--N", "2", "--rate", "0.5"],
        ["holevo", "--channel", "{f}", "--prior", "a,b"],
        ["simulate", "--channel", "{f}", "--n", "3", "--N", "2", "--trials", "0"],
    ])
    def test_usage_errors(self, argv, half_file, capsys):
        argv = [a.replace("{f}", half_file) for a in argv]
        assert run_command(argv) == 1

    def test_validation_exit(self, tmp_path):
        d = channel_to_dict(bsc(0.1))
        d["letters"][0]["matrix"][0][0][0] -= 0.02
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(d))
        assert run_command(["info", "--channel", str(path)]) == 2

    def test_resource_exit(self, half_file, tmp_path):
        out = tmp_path / "never.json"
        assert run_command(["simulate", "--channel", half_file, "--n", "8", "--N", "2",
                            "--max-dim", "64", "--out", str(out)]) == 3
        assert not out.exists()

    def test_env_cap(self, half_file, monkeypatch):
        monkeypatch.setenv("CQCAP_MAX_DIM", "16")
        assert run_command(["simulate", "--channel", half_file, "--n", "5", "--N", "2"]) == 3

    def test_nonconvergence_exit(self, tmp_path, rng):
        path = _dump(random_channel(3, 2, rng), tmp_path / "r.json")
        assert run_command(["capacity", "--channel", path, "--max-iters", "1", "--tol", "1e-12"]) == 4
