"""Command line front end: ``moment-spectra {analyze,decompose,oracle,synth,spectrum}``.

Exit codes: 0 success, 1 usage error, 2 bad data (I/O, parsing, size
limits), 3 numerical failure.
"""
import argparse
import sys
import time

import numpy as np

from . import __version__
from .decompose import leading_direction, median_split
from .diagnostics import check_theorem_firstmain, estimate_beta, gap_statistic, guarantee_lower_bound
from .exceptions import InputError, MomentSpectraError, UnsupportedError
from .io import SCHEMA, read_points, write_columns, write_points, dumps_report, atomic_write
from .models import (
    IID,
    PRNG_NAME,
    PRNG_VERSION,
    DiscreteAxes,
    Gaussian,
    ProjectionMixture,
    Sphere,
    hypercube,
    sample,
)
from .moments import DEFAULT_DENSE_LIMIT, SampleSet, fourth_moment_operator, second_moment
from .oracle import MAX_SUBSET_ATOMS, beta_exact_small, s_exact_small
from .spectra import full_spectrum, top_eigens

MODELS = ("gaussian", "iid", "iid-cube", "projection-mixture", "discrete-axes", "sphere")
REPORT_TOP = 10


class UsageError(Exception):
    exit_code = 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--input", help="CSV file with one sample per row")
    src.add_argument("--model", choices=MODELS, help="synthetic model family")
    common.add_argument("--d", type=int, help="dimension of the model")
    common.add_argument("--n", type=int, help="number of samples drawn from the model")
    common.add_argument("--m4", type=float, default=1.8, help="coordinate 4th moment for --model iid")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--p", type=int, choices=(4, 8), default=8)
    common.add_argument("--beta", type=float, help="known L^8-L^2 constant; marks bounds as certified")
    common.add_argument("--output", help="report (or CSV for synth) path; stdout when omitted")
    common.add_argument("--dense-limit", type=int, default=DEFAULT_DENSE_LIMIT)
    common.add_argument("--top-k", type=int, help="compute only the leading k eigenpairs")
    common.add_argument("--full-spectrum", action="store_true")
    common.add_argument("--analytic", action="store_true", help="use the model's exact moments")
    common.add_argument("--n-dirs", type=int, default=32, help="random directions in the beta search")
    common.add_argument("--assignments", help="decompose: CSV path for per-atom masses (w1, w2)")

    parser = _Parser(prog="moment-spectra", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, text in [
        ("analyze", "spectrum, gap statistic, separation bounds and beta estimate"),
        ("decompose", "median-split decomposition with its guarantee"),
        ("oracle", "exact values for small instances"),
        ("synth", "write seeded samples from a model"),
        ("spectrum", "eigenvalues of the 4th-moment operator"),
    ]:
        sub.add_parser(name, parents=[common], help=text, description=text)
    return parser


# -- inputs ------------------------------------------------------------------------


def make_model(args):
    if args.d is None:
        raise UsageError("--model needs --d")
    if args.d < 1:
        raise UsageError("--d must be positive")
    d = args.d
    if args.model == "gaussian":
        return Gaussian(np.eye(d))
    if args.model == "iid":
        return IID(d, args.m4)
    if args.model == "iid-cube":
        return hypercube(d)
    if args.model == "projection-mixture":
        return ProjectionMixture(d)
    if args.model == "discrete-axes":
        return DiscreteAxes(d)
    return Sphere(d)


def load_samples(args):
    if args.input:
        return SampleSet(read_points(args.input))
    if not args.model:
        raise UsageError("one of --input or --model is required")
    model = make_model(args)
    if args.n is None and not isinstance(model, DiscreteAxes):
        raise UsageError(f"--model {args.model} needs --n")
    return sample(model, args.n or 0, args.seed)


def load_moments(args):
    """``(samples, B, T)``; ``samples`` is None under ``--analytic``."""
    if args.analytic:
        if not args.model:
            raise UsageError("--analytic needs --model")
        model = make_model(args)
        return None, model.second_moment(), model.operator()
    samples = load_samples(args)
    B = second_moment(samples)
    return samples, B, fourth_moment_operator(samples, dense_limit=args.dense_limit)


def config_echo(args):
    keys = ["command", "input", "model", "d", "n", "m4", "seed", "p", "beta", "dense_limit",
            "top_k", "full_spectrum", "analytic", "n_dirs"]
    cfg = {k: getattr(args, k) for k in keys}
    if args.model != "iid":
        cfg.pop("m4")
    return cfg


# -- report pieces -------------------------------------------------------------


class _Clock:
    def __init__(self):
        self.timings = {}

    def __call__(self, name, fn, *a, **kw):
        t0 = time.perf_counter()
        out = fn(*a, **kw)
        self.timings[name] = time.perf_counter() - t0
        return out


def compute_spectrum(T, args):
    if args.top_k is not None:
        if args.top_k < 2:
            raise UsageError("--top-k must be at least 2")
        return top_eigens(T, min(args.top_k, T.coord_dim))
    return full_spectrum(T)


def spectrum_section(T, spec, args):
    shown = spec.eigenvalues if args.top_k is not None else spec.eigenvalues[:REPORT_TOP]
    out = {
        "coord_dim": T.coord_dim,
        "top": shown,
        "trace": T.trace,
        "degenerate": spec.degenerate,
        "method": spec.method,
    }
    if args.full_spectrum:
        if args.top_k is not None:
            raise UsageError("--full-spectrum cannot be combined with --top-k")
        out["full"] = spec.eigenvalues
    return out


def flags_section(samples, B, spec, centered_degenerate=None):
    d = B.shape[0]
    w = np.linalg.eigvalsh(B)
    rank = int(np.sum(w > 1e-12 * max(w.max(), 1e-300)))
    flags = {
        "degenerate_leading": bool(spec.degenerate),
        "rank_deficient": rank < d,
        "low_sample": samples is not None and samples.n < (d * (d + 1)) // 2,
    }
    if centered_degenerate is not None:
        flags["degenerate_direction"] = bool(centered_degenerate)
    return flags


def beta_section(samples, args, clock, T=None):
    """``(section, beta, status)``; ``beta`` is None when nothing is available."""
    if args.beta is not None:
        if args.beta < 1:
            raise InputError("--beta must be >= 1")
        return {"source": "user", "value": args.beta}, args.beta, "certified"
    if samples is None:
        return None, None, None
    est = clock("beta", estimate_beta, samples, args.p, args.n_dirs, args.seed, T=T)
    section = {
        "source": "search",
        "p": est.p,
        "lower": est.lower,
        "direction": est.direction,
        "directions_tested": est.directions_tested,
        "seed": est.seed,
        "certified_upper_p4": est.certified_upper_p4,
    }
    # the p = 4 constant never exceeds the p = 8 one, so either is an underestimate
    return section, max(est.lower, 1.0), "heuristic"


def gap_section(T, B, spec, beta, status):
    gamma = gap_statistic(T, B, spec)
    b2 = float(np.sum(B * B))
    lower_sq = None if beta is None else gamma ** 3 / (200.0 * beta ** 8)
    out = {
        "lambda1": spec.lambda1,
        "lambda2": spec.lambda2,
        "B_frob_sq": b2,
        "gamma": gamma,
        "s_upper_normalized_sq": 4.0 * gamma,
        "s_lower_normalized_sq": lower_sq,
        "s_upper": float(np.sqrt(4.0 * gamma * b2)),
        "s_lower": None if lower_sq is None else float(np.sqrt(lower_sq * b2)),
        "upper_unconditional": True,
        "beta_used": beta,
        "lower_status": status,
        "trace_T": T.trace,
    }
    if len(spec.eigenvalues) == T.coord_dim:
        out["eigenvalue_slacks"] = list(check_theorem_firstmain(T, B, spec))
    return out


def base_report(args):
    return {
        "schema": SCHEMA,
        "tool_version": __version__,
        "prng": {"name": PRNG_NAME, "version": PRNG_VERSION},
        "config": config_echo(args),
    }


# -- commands ------------------------------------------------------------------------


def cmd_spectrum(args):
    clock = _Clock()
    samples, B, T = clock("moments", load_moments, args)
    spec = clock("spectrum", compute_spectrum, T, args)
    report = base_report(args)
    report["spectrum"] = spectrum_section(T, spec, args)
    report["flags"] = flags_section(samples, B, spec)
    report["timings"] = clock.timings
    return report


def cmd_analyze(args):
    clock = _Clock()
    samples, B, T = clock("moments", load_moments, args)
    spec = clock("spectrum", compute_spectrum, T, args)
    beta_info, beta, status = beta_section(samples, args, clock, T)
    report = base_report(args)
    report["n"] = None if samples is None else samples.n
    report["spectrum"] = spectrum_section(T, spec, args)
    report["gap"] = gap_section(T, B, spec, beta, status)
    report["beta"] = beta_info
    report["flags"] = flags_section(samples, B, spec)
    report["timings"] = clock.timings
    return report


def cmd_decompose(args):
    if args.analytic:
        raise UsageError("decompose needs samples, not --analytic")
    clock = _Clock()
    samples, B, T = clock("moments", load_moments, args)
    spec = clock("spectrum", full_spectrum, T)
    beta_info, beta, status = beta_section(samples, args, clock, T)
    direction = clock("direction", leading_direction, T, B)
    split = clock("split", median_split, samples, direction.A)
    guarantee = guarantee_lower_bound(T, B, beta, spec)
    report = base_report(args)
    report["n"] = samples.n
    report["spectrum"] = spectrum_section(T, spec, args)
    report["gap"] = gap_section(T, B, spec, beta, status)
    report["beta"] = beta_info
    report["decomposition"] = {
        "A": split.A,
        "b0": split.b0,
        "alpha": split.alpha,
        "achieved": split.achieved,
        "normalized_achieved": split.normalized_achieved,
        "guarantee": guarantee,
        "guarantee_status": status,
        "mass1_total": float(split.mass1.sum()),
        "mass2_total": float(split.mass2.sum()),
    }
    if samples.uniform and samples.n % 2 == 0 and samples.n <= MAX_SUBSET_ATOMS:
        exact = clock("oracle", s_exact_small, samples)
        report["oracle"] = {
            "s_exact": exact.value,
            "argmax": exact.argmax,
            "instance_hash": exact.instance_hash,
            "achieved_le_s": split.achieved <= exact.value + 1e-9,
        }
    report["flags"] = flags_section(samples, B, spec, direction.degenerate)
    if args.assignments:
        write_columns(args.assignments, {"w1": split.mass1, "w2": split.mass2})
        report["assignments"] = args.assignments
    report["timings"] = clock.timings
    return report


def cmd_oracle(args):
    if args.analytic:
        raise UsageError("oracle needs samples, not --analytic")
    clock = _Clock()
    samples = load_samples(args)
    report = base_report(args)
    report["n"] = samples.n
    skipped = {}
    try:
        res = clock("s_exact", s_exact_small, samples)
        report["s_exact"] = {"value": res.value, "argmax": res.argmax,
                             "method": res.method, "instance_hash": res.instance_hash}
    except UnsupportedError as exc:
        skipped["s_exact"] = str(exc)
    if samples.dim <= 3:
        res = clock("beta_exact", beta_exact_small, samples, args.p)
        report["beta_exact"] = {"p": args.p, "value": res.value, "argmax": res.argmax,
                                "method": res.method, "instance_hash": res.instance_hash}
    else:
        skipped["beta_exact"] = f"grid oracle supports d <= 3, got {samples.dim}"
    if len(skipped) == 2:
        raise UnsupportedError("instance exceeds every oracle size limit: " + "; ".join(skipped.values()))
    report["skipped"] = skipped
    report["timings"] = clock.timings
    return report


def cmd_synth(args):
    if args.input or not args.model:
        raise UsageError("synth needs --model")
    if not args.output:
        raise UsageError("synth needs --output")
    samples = load_samples(args)
    comment = f"model={args.model}, seed={args.seed}, version={__version__}"
    write_points(args.output, samples.points, comment)
    return None


COMMANDS = {
    "analyze": cmd_analyze,
    "decompose": cmd_decompose,
    "oracle": cmd_oracle,
    "synth": cmd_synth,
    "spectrum": cmd_spectrum,
}


def run(args):
    """Execute parsed arguments; return the report (None for ``synth``)."""
    report = COMMANDS[args.command](args)
    if report is not None:
        text = dumps_report(report)
        if args.output:
            atomic_write(args.output, text)
        else:
            sys.stdout.write(text)
    return report


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        run(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"moment-spectra: error: {exc}", file=sys.stderr)
        return 1
    except MomentSpectraError as exc:
        print(f"moment-spectra: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"moment-spectra: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
