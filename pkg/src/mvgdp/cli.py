"""Command-line interface.

Subcommands:
    budget   print the privacy-budget quantities for a query shape
    sample   draw matrix-Gaussian noise samples given dense covariances
    perturb  privately release a dataset or its covariance
    bench    run a benchmark experiment and print the metric report

Exit codes: 0 success, 2 configuration or format error, 3 contract violation
(data escaping declared bounds or a false gamma claim), 4 internal assertion
failure (a constructed design failed the privacy condition).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .budget import (
    PrivacyParams,
    QueryKind,
    QuerySpec,
    precision_budget_equimodal,
    precision_budget_unimodal,
)
from .design import NoiseDesign
from .errors import (
    AllocationError,
    ConditionCheckError,
    ConfigError,
    ContractViolationError,
    DegenerateDesignError,
    DomainError,
    FormatError,
    ShapeError,
)
from .harness import (
    Experiment,
    ExperimentConfig,
    MechanismKind,
    ReportFormat,
    emit_report,
    load_csv_matrix,
    load_dense_csv,
    parse_directions_source,
    parse_theta_spec,
    run_experiment,
)
from .mechanisms import derive_directions_dp, mvg_equimodal, mvg_unimodal
from .sampling import RandomStream, sample_mvg
from .sensitivity import (
    DataBounds,
    covariance_sensitivity,
    gamma_covariance,
    gamma_identity,
    identity_sensitivity,
)

_CONFIG_ERRORS = (DomainError, ShapeError, AllocationError, DegenerateDesignError,
                  FormatError, ConfigError)


def _write_csv(path: str, matrix: np.ndarray) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        for row in np.atleast_2d(matrix):
            writer.writerow([repr(float(v)) for v in row])


def _cmd_budget(args) -> int:
    p = PrivacyParams(args.epsilon, args.delta)
    q = QuerySpec(args.m, args.n, sensitivity=args.sensitivity, gamma=args.gamma)
    if args.mode == "unimodal":
        report = precision_budget_unimodal(q, p)
    else:
        report = precision_budget_equimodal(q, p)
    out = sys.stdout
    out.write(f"h_r={report.h_r!r}\n")
    out.write(f"h_r_half={report.h_r_half!r}\n")
    out.write(f"zeta={report.zeta!r}\n")
    out.write(f"alpha={report.alpha!r}\n")
    out.write(f"beta={report.beta!r}\n")
    out.write(f"phi_max={report.phi_max!r}\n")
    out.write(f"precision_budget={report.precision_budget!r}\n")
    out.write(f"mode={report.mode.value}\n")
    return 0


def _cmd_sample(args) -> int:
    sigma = load_dense_csv(args.sigma)
    psi = load_dense_csv(args.psi)
    if sigma.shape != (args.m, args.m):
        raise ConfigError(f"sigma is {sigma.shape}, expected ({args.m}, {args.m})")
    if psi.shape != (args.n, args.n):
        raise ConfigError(f"psi is {psi.shape}, expected ({args.n}, {args.n})")
    design = NoiseDesign.from_covariances(sigma, psi)
    stream = RandomStream(args.seed)
    if args.count < 1:
        raise ConfigError(f"count must be positive, got {args.count}")
    samples = [sample_mvg(stream, design).reshape(-1) for _ in range(args.count)]
    _write_csv(args.out, np.asarray(samples))
    return 0


def _perturb_once(x, query: str, p: PrivacyParams, bounds: DataBounds,
                  theta_spec: str, directions: str, stream: RandomStream):
    if query == "identity":
        q = QuerySpec(bounds.num_features, bounds.num_samples,
                      sensitivity=identity_sensitivity(bounds),
                      gamma=gamma_identity(bounds), kind=QueryKind.IDENTITY)
        value = x
    else:
        q = QuerySpec(bounds.num_features, bounds.num_features,
                      sensitivity=covariance_sensitivity(bounds),
                      gamma=gamma_covariance(bounds), kind=QueryKind.COVARIANCE)
        value = x @ x.T / bounds.num_samples
    theta = parse_theta_spec(theta_spec, q.m)
    tag, val = parse_directions_source(directions)
    p_mech = p
    if tag == "standard":
        w = np.eye(q.m)
    elif tag == "file":
        w = load_dense_csv(val)
    else:
        p_dir = PrivacyParams(p.epsilon * val, p.delta * val)
        p_mech = PrivacyParams(p.epsilon * (1 - val), p.delta * (1 - val))
        w = derive_directions_dp(x, p_dir, q.m, stream, bounds=bounds)
    if query == "identity":
        return mvg_unimodal(value, q, p_mech, theta, w, stream)
    return mvg_equimodal(value, q, p_mech, theta, w, stream)


def _cmd_perturb(args) -> int:
    x, _ = load_csv_matrix(args.input, args.has_header)
    num_features, num_samples = x.shape
    bounds = DataBounds(num_features, num_samples, args.lo, args.hi)
    if float(x.min()) < args.lo or float(x.max()) > args.hi:
        raise ContractViolationError(
            f"data range [{x.min():.6g}, {x.max():.6g}] escapes the declared "
            f"bounds [{args.lo}, {args.hi}]"
        )
    delta = args.delta if args.delta is not None else 1.0 / num_samples
    p = PrivacyParams(args.epsilon, delta)
    stream = RandomStream(args.seed)
    result = _perturb_once(x, args.query, p, bounds, args.theta,
                           args.directions, stream)
    if args.query == "identity":
        _write_csv(args.out, result.output.T)  # back to rows-as-records
    else:
        _write_csv(args.out, result.output)
    return 0


_BENCH_DEFAULTS = {
    "experiment": None, "input": None, "mechanism": None, "epsilon": None,
    "delta": None, "lo": 0.0, "hi": 1.0, "tau": 0.9, "favored": None,
    "theta": None, "directions": "standard", "trials": 100, "ridge_reg": 1.0,
    "seed": 0, "format": "text", "has_header": False,
}


def _resolve_bench_options(args) -> dict:
    """Merge CLI flags over an optional JSON config file over the defaults."""
    from_file: dict = {}
    if args.config is not None:
        try:
            with open(args.config, encoding="utf-8") as handle:
                from_file = json.load(handle)
        except OSError as exc:
            raise ConfigError(f"could not read config file: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: invalid JSON ({exc})") from None
        unknown = set(from_file) - set(_BENCH_DEFAULTS)
        if unknown:
            raise ConfigError(
                f"{args.config}: unknown config keys {sorted(unknown)}"
            )
    options = {}
    for key, default in _BENCH_DEFAULTS.items():
        cli_value = getattr(args, key)
        if cli_value is not None:
            options[key] = cli_value
        elif key in from_file and from_file[key] is not None:
            options[key] = from_file[key]
        else:
            options[key] = default
    for key in ("experiment", "input", "mechanism", "epsilon"):
        if options[key] is None:
            raise ConfigError(
                f"missing required option --{key} (flag or config file)"
            )
    return options


def _cmd_bench(args) -> int:
    opts = _resolve_bench_options(args)
    x, _ = load_csv_matrix(opts["input"], bool(opts["has_header"]))
    num_features, num_samples = x.shape
    delta = opts["delta"] if opts["delta"] is not None else 1.0 / num_samples
    if opts["theta"] is not None:
        theta_spec = str(opts["theta"])
    elif opts["favored"] is not None:
        theta_spec = f"binary:{opts['tau']}:{opts['favored']}"
    else:
        theta_spec = "uniform"
    cfg = ExperimentConfig(
        experiment=Experiment(opts["experiment"]),
        dataset_path=opts["input"],
        bounds=DataBounds(num_features, num_samples,
                          float(opts["lo"]), float(opts["hi"])),
        privacy=PrivacyParams(float(opts["epsilon"]), float(delta)),
        mechanism=MechanismKind(opts["mechanism"]),
        theta_spec=theta_spec,
        directions_source=str(opts["directions"]),
        trials=int(opts["trials"]),
        seed=int(opts["seed"]),
        csv_has_header=bool(opts["has_header"]),
        ridge_reg=float(opts["ridge_reg"]),
    )
    report = run_experiment(cfg)
    sys.stdout.buffer.write(emit_report(report, ReportFormat(opts["format"])))
    sys.stdout.buffer.flush()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mvgdp",
        description="Matrix-variate Gaussian mechanism for differentially "
                    "private matrix-valued queries.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("budget", help="print privacy-budget quantities")
    b.add_argument("--epsilon", type=float, required=True)
    b.add_argument("--delta", type=float, required=True)
    b.add_argument("--m", type=int, required=True)
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--gamma", type=float, required=True)
    b.add_argument("--sensitivity", type=float, required=True)
    b.add_argument("--mode", choices=["unimodal", "equimodal"], required=True)
    b.set_defaults(func=_cmd_budget)

    s = sub.add_parser("sample", help="draw matrix-Gaussian noise samples")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--sigma", required=True, help="dense m x m covariance CSV")
    s.add_argument("--psi", required=True, help="dense n x n covariance CSV")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--count", type=int, default=1)
    s.add_argument("--out", required=True,
                   help="output CSV, one row-major flattened sample per row")
    s.set_defaults(func=_cmd_sample)

    pt = sub.add_parser("perturb", help="privately release a dataset or covariance")
    pt.add_argument("--input", required=True, help="dataset CSV, rows are records")
    pt.add_argument("--query", choices=["identity", "covariance"], required=True)
    pt.add_argument("--epsilon", type=float, required=True)
    pt.add_argument("--delta", type=float, default=None,
                    help="defaults to 1/N for the loaded dataset")
    pt.add_argument("--lo", type=float, required=True)
    pt.add_argument("--hi", type=float, required=True)
    pt.add_argument("--theta", default="uniform",
                    help="uniform | binary:TAU:I,J,... | explicit shares")
    pt.add_argument("--directions", default="standard",
                    help="standard | PATH | dp:FRACTION")
    pt.add_argument("--seed", type=int, default=0)
    pt.add_argument("--out", required=True)
    pt.add_argument("--has-header", action="store_true")
    pt.set_defaults(func=_cmd_perturb)

    # bench flags default to None so an optional JSON config file can fill
    # anything not given explicitly; flags always win over the file
    bn = sub.add_parser("bench", help="run a benchmark experiment")
    bn.add_argument("--config", default=None,
                    help="JSON file supplying defaults for any bench option")
    bn.add_argument("--experiment", choices=[e.value for e in Experiment])
    bn.add_argument("--input")
    bn.add_argument("--mechanism", choices=[k.value for k in MechanismKind])
    bn.add_argument("--trials", type=int)
    bn.add_argument("--epsilon", type=float)
    bn.add_argument("--delta", type=float,
                    help="defaults to 1/N for the loaded dataset")
    bn.add_argument("--lo", type=float)
    bn.add_argument("--hi", type=float)
    bn.add_argument("--tau", type=float,
                    help="budget share for the favored directions (default 0.9)")
    bn.add_argument("--favored",
                    help="comma-separated favored direction indices")
    bn.add_argument("--theta",
                    help="full allocation spec; overrides --tau/--favored")
    bn.add_argument("--directions", help="standard | PATH | dp:FRACTION")
    bn.add_argument("--ridge-reg", type=float, dest="ridge_reg")
    bn.add_argument("--seed", type=int)
    bn.add_argument("--format", choices=["text", "csv"])
    bn.add_argument("--has-header", action=argparse.BooleanOptionalAction,
                    default=None)
    bn.set_defaults(func=_cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ContractViolationError as exc:
        print(f"mvgdp: contract violation: {exc}", file=sys.stderr)
        return 3
    except ConditionCheckError as exc:
        print(f"mvgdp: internal assertion failed: {exc}", file=sys.stderr)
        return 4
    except _CONFIG_ERRORS as exc:
        print(f"mvgdp: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
