"""Command line interface: ``cqcap <command> [options]``.

Exit codes: 0 success, 1 usage, 2 validation, 3 resource cap,
4 non-convergence.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .capacity import DEFAULT_CAPACITY_TOL, DEFAULT_MAX_ITERS, additivity_check, optimize_prior
from .channel import as_prior, average_state, default_max_dim, holevo_quantity, uniform_prior
from .coding import average_error_probability, error_bound_eq17, sample_codebook, sqm_decoder
from .errors import ArgumentError, ConvergenceError, CQCapError, DegenerateDecoderError
from .experiment import codebook_size, derive_seed, monte_carlo_experiment, random_coding_bound
from .gram import gram_cross_check
from .io import atomic_write, emit_report, format_sig, parse_channel_file, to_structured, to_table
from .operators import entropy_of_spectrum
from .typical import expected_word_typicality, typical_projector, typicality_mass

log = logging.getLogger("cqcap")


class UsageError(CQCapError):
    exit_code = 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass(frozen=True)
class ExperimentConfig:
    channel: str
    prior: str
    n: int
    N: int | None
    rate: float | None
    delta: float
    epsilon: float
    trials: int
    seed: int
    out: str | None
    fmt: str
    max_dim: int

    def __post_init__(self):
        if self.n < 1:
            raise UsageError(f"--n must be at least 1, got {self.n}")
        if self.N is not None and self.rate is not None:
            raise UsageError("give only one of --N and --rate")
        if self.N is not None and self.N < 1:
            raise UsageError(f"--N must be at least 1, got {self.N}")
        if self.rate is not None and self.rate < 0:
            raise UsageError(f"--rate must be non-negative, got {self.rate}")
        if self.delta <= 0 or self.epsilon <= 0:
            raise UsageError("--delta and --epsilon must be positive")
        if self.trials < 1:
            raise UsageError(f"--trials must be at least 1, got {self.trials}")
        if self.seed < 0:
            raise UsageError(f"--seed must be non-negative, got {self.seed}")
        if self.max_dim < 1:
            raise UsageError(f"--max-dim must be positive, got {self.max_dim}")

    @classmethod
    def from_args(cls, args) -> "ExperimentConfig":
        return cls(args.channel, args.prior, args.n, args.N, args.rate, args.delta, args.epsilon,
                   args.trials, args.seed, args.out, args.format, args.max_dim)


def resolve_prior(spec: str, channel) -> np.ndarray:
    """``uniform``, ``optimal`` or a comma-separated list of weights."""
    if spec == "uniform":
        return uniform_prior(channel.a)
    if spec == "optimal":
        res = optimize_prior(channel)
        if not res.converged:
            raise ConvergenceError(f"optimal prior did not converge (gap {res.optimality_gap:.3g})")
        return res.optimal_prior
    try:
        weights = [float(x) for x in spec.split(",")]
    except ValueError:
        raise UsageError(f"--prior must be 'uniform', 'optimal' or comma-separated numbers, got {spec!r}") from None
    return as_prior(weights, channel.a)


def _emit(args, payload, text: str) -> None:
    fmt = args.format
    if fmt == "text":
        rendered = text
    elif fmt == "json":
        rendered = to_structured(payload)
    else:
        rendered = emit_report(payload, "csv")
    if args.out:
        atomic_write(args.out, rendered)
    else:
        sys.stdout.write(rendered)


def cmd_info(args) -> int:
    ch = parse_channel_file(args.channel)
    ent = ch.entropies()
    payload = {"alphabet_size": ch.a, "dim": ch.d,
               "letters": [{"label": lab, "entropy": float(h)} for lab, h in zip(ch.labels, ent)]}
    lines = [f"alphabet size {ch.a}, dimension {ch.d}"]
    lines += [f"  {lab}: H = {h:.6f} bits" for lab, h in zip(ch.labels, ent)]
    _emit(args, payload, "\n".join(lines) + "\n")
    return 0


def cmd_holevo(args) -> int:
    ch = parse_channel_file(args.channel)
    p = resolve_prior(args.prior, ch)
    value = holevo_quantity(ch, p)
    _emit(args, {"prior": p.tolist(), "holevo": value}, f"{value:.6f}\n")
    return 0


def cmd_capacity(args) -> int:
    ch = parse_channel_file(args.channel)
    res = optimize_prior(ch, args.tol, args.max_iters)
    text = (f"{res.capacity:.6f}\n"
            f"prior: {' '.join(format_sig(x) for x in res.optimal_prior)}\n"
            f"gap: {res.optimality_gap:.3g}  iterations: {res.iterations}  converged: {res.converged}\n")
    _emit(args, res, text)
    return 0 if res.converged else ConvergenceError.exit_code


def cmd_typicality(args) -> int:
    cfg = ExperimentConfig.from_args(args)
    ch = parse_channel_file(cfg.channel)
    p = resolve_prior(cfg.prior, ch)
    sbar = average_state(ch, p)
    typ = typical_projector(sbar, cfg.n, cfg.delta, ch.tol)
    mass = typicality_mass(typ)
    word_mass = expected_word_typicality(ch, p, cfg.n, cfg.delta)
    payload = {
        "n": cfg.n, "delta": cfg.delta, "prior": p.tolist(),
        "H_avg": typ.center, "H_cond": float(p @ ch.entropies()),
        "rank_P": typ.rank, "mass_P": mass, "mean_mass_Pu": word_mass,
    }
    text = (f"Tr Sbar^n P = {mass:.9f}  (rank {typ.rank} of {ch.d}^{cfg.n})\n"
            f"M Tr S_u P_u = {word_mass:.9f}\n")
    _emit(args, payload, text)
    return 0


def cmd_simulate(args) -> int:
    cfg = ExperimentConfig.from_args(args)
    ch = parse_channel_file(cfg.channel)
    p = resolve_prior(cfg.prior, ch)
    report = monte_carlo_experiment(ch, p, cfg.n, N=cfg.N, rate=cfg.rate, delta=cfg.delta,
                                    epsilon=cfg.epsilon, trials=cfg.trials, seed=cfg.seed,
                                    max_dim=cfg.max_dim, workers=args.workers)
    log.info("simulate: %d trials in %.2fs", cfg.trials, report.elapsed)
    text = (f"n={cfg.n} N={report.config['N']} delta={cfg.delta} trials={cfg.trials}\n"
            f"mean P_er = {report.mean_p_err:.6f} +- {report.stderr_p_err:.6f}\n"
            f"mean bound (deterministic) = {report.mean_bound17:.6f}\n"
            f"random-coding bound = {report.bound18:.6f}\n")
    _emit(args, report, text)
    return 0


def cmd_bound(args) -> int:
    cfg = ExperimentConfig.from_args(args)
    ch = parse_channel_file(cfg.channel)
    p = resolve_prior(cfg.prior, ch)
    N = codebook_size(cfg.n, cfg.rate, cfg.N)
    seed = derive_seed(cfg.seed, 0)
    cb = sample_codebook(ch, p, cfg.n, N, seed)
    breakdown = error_bound_eq17(cb, p, cfg.delta, max_dim=cfg.max_dim)
    try:
        p_err = average_error_probability(cb, sqm_decoder(cb, p, cfg.delta, max_dim=cfg.max_dim))
    except DegenerateDecoderError:
        p_err = 1.0
    h_avg = entropy_of_spectrum(np.linalg.eigvalsh(average_state(ch, p)), ch.tol)
    h_cond = float(p @ ch.entropies())
    b18 = random_coding_bound(h_avg, h_cond, cfg.n, N, cfg.delta, cfg.epsilon)
    payload = {"n": cfg.n, "N": N, "delta": cfg.delta, "epsilon": cfg.epsilon, "seed": seed,
               "words": cb.words.tolist(), "p_err": p_err, "bound17": breakdown.to_dict(),
               "bound18": b18}
    if cfg.fmt == "csv":
        rendered = to_table([{"n": cfg.n, "N": N, "delta": cfg.delta, "trial": 0, "seed": seed,
                              "p_err": p_err, "bound17": breakdown.total_bound, "bound18": b18}])
        if cfg.out:
            atomic_write(cfg.out, rendered)
        else:
            sys.stdout.write(rendered)
        return 0
    text = (f"exact P_er = {p_err:.6f}\n"
            f"deterministic bound = {breakdown.total_bound:.6f}\n"
            f"random-coding bound = {b18:.6f}\n")
    _emit(args, payload, text)
    return 0


def cmd_additivity(args) -> int:
    ch1 = parse_channel_file(args.channel)
    ch2 = parse_channel_file(args.channel2)
    rep = additivity_check(ch1, ch2, args.tol, args.max_iters, args.max_dim)
    text = (f"C1 = {rep.c1:.6f}\nC2 = {rep.c2:.6f}\n"
            f"C(product) = {rep.c_product:.6f}\ndefect = {rep.defect:.3g}\n")
    _emit(args, rep, text)
    return 0 if rep.product_result.converged else ConvergenceError.exit_code


def cmd_crosscheck(args) -> int:
    cfg = ExperimentConfig.from_args(args)
    ch = parse_channel_file(cfg.channel)
    p = resolve_prior(cfg.prior, ch)
    N = codebook_size(cfg.n, cfg.rate, cfg.N)
    cb = sample_codebook(ch, p, cfg.n, N, derive_seed(cfg.seed, 0))
    rep = gram_cross_check(cb, p, cfg.delta, max_dim=cfg.max_dim)
    text = (f"P_er (operator) = {rep.p_err_operator:.12f}\n"
            f"P_er (Gram)     = {rep.p_err_gram:.12f}\n"
            f"difference      = {rep.max_diff:.3g}\n"
            f"trace inequality holds: {rep.eq16_holds} ({rep.eq16_lhs:.6g} <= {rep.eq16_rhs:.6g})\n")
    _emit(args, rep, text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cqcap", description="Capacity and random-coding tools for classical-quantum channels.")
    parser.add_argument("--version", action="version", version=f"cqcap {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, fmts=("text", "json")):
        p.add_argument("--channel", required=True, help="channel file (JSON)")
        p.add_argument("--out", help="write output here instead of stdout")
        p.add_argument("--format", choices=fmts, default="text")
        p.add_argument("--max-dim", type=int, default=default_max_dim(),
                       help="dimension cap for d**n (default 4096, env CQCAP_MAX_DIM)")

    def optim(p):
        p.add_argument("--tol", type=float, default=DEFAULT_CAPACITY_TOL)
        p.add_argument("--max-iters", type=int, default=DEFAULT_MAX_ITERS)

    def experiment(p, sized=True):
        p.add_argument("--prior", default="uniform", help="'uniform', 'optimal' or comma-separated weights")
        p.add_argument("--n", type=int, required=True, help="word length")
        group = p.add_mutually_exclusive_group(required=sized)
        group.add_argument("--N", type=int, help="codebook size")
        group.add_argument("--rate", type=float, help="rate R; N = ceil(2**(R n))")
        p.add_argument("--delta", type=float, default=0.1)
        p.add_argument("--epsilon", type=float, default=0.01)
        p.add_argument("--trials", type=int, default=20)
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("info", help="validate a channel and list letter entropies")
    common(p)
    p.set_defaults(func=cmd_info)

    p = sub.add_parser("holevo", help="entropy bound for a given prior")
    common(p)
    p.add_argument("--prior", default="uniform")
    p.set_defaults(func=cmd_holevo)

    p = sub.add_parser("capacity", help="maximize the entropy bound over priors")
    common(p)
    optim(p)
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("typicality", help="typical-subspace masses for given n and delta")
    common(p)
    experiment(p, sized=False)
    p.set_defaults(func=cmd_typicality)

    p = sub.add_parser("simulate", help="random-coding experiment with the square-root decoder")
    common(p, ("text", "json", "csv"))
    experiment(p)
    p.add_argument("--workers", type=int, default=1, help="threads for independent trials")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bound", help="deterministic and random-coding bounds for one codebook")
    common(p, ("text", "json", "csv"))
    experiment(p)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("additivity", help="capacity of a product channel versus the sum")
    common(p)
    p.add_argument("--channel2", required=True, help="second channel file")
    optim(p)
    p.set_defaults(func=cmd_additivity)

    p = sub.add_parser("crosscheck", help="Gram-matrix versus operator error probability")
    common(p)
    experiment(p)
    p.set_defaults(func=cmd_crosscheck)
    return parser


def run_command(argv=None) -> int:
    """Parse ``argv``, dispatch, and return the exit status."""
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return args.func(args)
    except ArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return UsageError.exit_code
    except CQCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
