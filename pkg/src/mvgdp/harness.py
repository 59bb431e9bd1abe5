"""Experiment orchestration: CSV ingestion, trial loops, report emission.

Datasets on disk follow the usual rows-are-records convention; they are
transposed on load so that, in memory, columns are the records. Three
experiment archetypes are provided plus a direction-ablation sweep:

* regression: identity query on the training slice, with the target values
  carried as an extra feature row through the perturbation, then a ridge
  regression evaluated on the untouched test slice (RMSE).
* firstpc: covariance query, top principal direction of the perturbed
  estimate scored by its captured-variance gap.
* covest: identity query on the whole dataset (input perturbation),
  covariance recomputed from the perturbed data and scored by the residual
  sum of squares over all principal directions.
* ablation: the firstpc experiment swept over three direction sets (the
  declared favored set, its complement, and a uniform allocation), emitting
  one report per arm.

Runs are deterministic: trial t uses the stream seeded with seed + t, so an
identical configuration yields byte-identical reports.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .budget import PrivacyParams, QueryKind, QuerySpec, check_condition
from .errors import ConditionCheckError, ConfigError, ContractViolationError, FormatError
from .mechanisms import (
    PrecisionAllocation,
    derive_directions_dp,
    gaussian_iid_baseline,
    laplace_iid_baseline,
    mvg_equimodal,
    mvg_unimodal,
)
from .metrics import EvalReport, delta_rho, mean_ci95, ridge_regression_rmse, rss
from .sampling import RandomStream
from .sensitivity import (
    DataBounds,
    covariance_sensitivity,
    covariance_sensitivity_l1,
    gamma_covariance,
    gamma_identity,
    identity_sensitivity,
    identity_sensitivity_l1,
)

_SEED_MOD = 2 ** 64


class Experiment(enum.Enum):
    REGRESSION = "regression"
    FIRST_PC = "firstpc"
    COVARIANCE_ESTIMATION = "covest"
    DIRECTION_ABLATION = "ablation"


class MechanismKind(enum.Enum):
    MVG_UNIMODAL = "mvg-uni"
    MVG_EQUIMODAL = "mvg-equi"
    GAUSSIAN_IID = "gauss"
    LAPLACE_IID = "laplace"


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one benchmark run."""

    experiment: Experiment
    dataset_path: str | Path
    bounds: DataBounds
    privacy: PrivacyParams
    mechanism: MechanismKind
    theta_spec: str = "uniform"
    directions_source: str = "standard"
    trials: int = 1
    seed: int = 0
    csv_has_header: bool = False
    ridge_reg: float = 1.0
    train_fraction: float = 0.72

    def __post_init__(self):
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError(f"trials must be a positive integer, got {self.trials!r}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed must be a nonnegative integer, got {self.seed!r}")
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError(
                f"train_fraction must lie in (0, 1), got {self.train_fraction}"
            )
        if not self.ridge_reg > 0:
            raise ConfigError(f"ridge_reg must be positive, got {self.ridge_reg}")


def _parse_grid(path, has_header: bool) -> tuple[list[list[float]], list[str] | None]:
    path = Path(path)
    if not path.exists():
        raise FormatError(f"{path}: file not found")
    names: list[str] | None = None
    rows: list[list[float]] = []
    width: int | None = None
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        for line_no, record in enumerate(reader, start=1):
            cells = [cell.strip() for cell in record]
            if not cells or all(cell == "" for cell in cells):
                continue
            if has_header and names is None and not rows:
                names = cells
                width = len(cells)
                continue
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise FormatError(
                    f"{path}: line {line_no} has {len(cells)} cells, expected {width}"
                )
            parsed = []
            for col_no, cell in enumerate(cells, start=1):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise FormatError(
                        f"{path}: non-numeric cell at line {line_no}, column "
                        f"{col_no}: {cell!r}"
                    ) from None
            rows.append(parsed)
    if not rows:
        raise FormatError(f"{path}: no data rows found")
    return rows, names


def load_csv_matrix(path, has_header: bool = False) -> tuple[np.ndarray, list[str] | None]:
    """Load a dataset CSV into the columns-are-records convention.

    File rows are records; the returned matrix has one row per file column
    (feature) and one column per file row (record). Decimal separator is
    always the dot regardless of locale.
    """
    rows, names = _parse_grid(path, has_header)
    return np.asarray(rows, dtype=float).T, names


def load_dense_csv(path) -> np.ndarray:
    """Load a plain numeric matrix CSV without transposition.

    Used for covariance and direction matrices, where file rows are matrix
    rows.
    """
    rows, _ = _parse_grid(path, has_header=False)
    return np.asarray(rows, dtype=float)


def parse_theta_spec(spec: str, m: int) -> PrecisionAllocation:
    """Parse an allocation descriptor.

    Grammar: ``uniform`` | ``binary:TAU:I,J,...`` | explicit comma-separated
    shares such as ``0.4,0.4,0.1,0.1``.
    """
    text = spec.strip()
    if text == "uniform":
        return PrecisionAllocation.uniform(m)
    if text.startswith("binary:"):
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(
                f"binary allocation must look like binary:TAU:I,J,... got {spec!r}"
            )
        try:
            tau = float(parts[1])
            favored = [int(tok) for tok in parts[2].split(",") if tok.strip() != ""]
        except ValueError:
            raise ConfigError(f"could not parse binary allocation {spec!r}") from None
        return PrecisionAllocation.binary(m, tau, favored)
    try:
        shares = [float(tok) for tok in text.split(",")]
    except ValueError:
        raise ConfigError(f"could not parse allocation {spec!r}") from None
    if len(shares) != m:
        raise ConfigError(
            f"allocation {spec!r} has {len(shares)} entries, expected {m}"
        )
    return PrecisionAllocation(np.asarray(shares))


def parse_directions_source(source: str):
    """Parse a directions descriptor into one of three tagged forms.

    ``standard`` uses the standard basis; ``dp:FRACTION`` derives directions
    privately, spending that fraction of the budget; anything else is a path
    to a dense CSV holding an orthonormal matrix.
    """
    text = str(source).strip()
    if text == "standard":
        return ("standard", None)
    if text.startswith("dp:"):
        try:
            fraction = float(text[3:])
        except ValueError:
            raise ConfigError(f"could not parse direction budget in {source!r}") from None
        if not 0.0 < fraction < 1.0:
            raise ConfigError(
                f"direction budget fraction must lie in (0, 1), got {fraction}"
            )
        return ("dp", fraction)
    return ("file", text)


def _binary_parts(spec: str) -> tuple[float, list[int]]:
    text = spec.strip()
    if not text.startswith("binary:"):
        raise ConfigError(
            "the ablation experiment needs a binary allocation "
            f"(binary:TAU:I,J,...), got {spec!r}"
        )
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"malformed binary allocation {spec!r}")
    try:
        tau = float(parts[1])
        favored = [int(tok) for tok in parts[2].split(",") if tok.strip() != ""]
    except ValueError:
        raise ConfigError(f"could not parse binary allocation {spec!r}") from None
    return tau, favored


def _audit_bounds(x: np.ndarray, bounds: DataBounds) -> None:
    if x.shape != (bounds.num_features, bounds.num_samples):
        raise ConfigError(
            f"declared bounds describe a {bounds.num_features}x"
            f"{bounds.num_samples} dataset but the file holds {x.shape[0]}x"
            f"{x.shape[1]}"
        )
    lo, hi = float(x.min()), float(x.max())
    if lo < bounds.lo or hi > bounds.hi:
        raise ContractViolationError(
            f"data range [{lo:.6g}, {hi:.6g}] escapes the declared bounds "
            f"[{bounds.lo}, {bounds.hi}]; sensitivity and gamma claims would "
            "be false"
        )


class _Perturber:
    """Per-experiment mechanism dispatch, fixed once per run."""

    def __init__(self, cfg: ExperimentConfig, q: QuerySpec, bounds: DataBounds,
                 direction_data: np.ndarray | None,
                 theta_spec: str | None = None):
        self.cfg = cfg
        self.q = q
        self.kind = cfg.mechanism
        source_tag, source_val = parse_directions_source(cfg.directions_source)
        is_mvg = self.kind in (MechanismKind.MVG_UNIMODAL, MechanismKind.MVG_EQUIMODAL)
        if not is_mvg and source_tag != "standard":
            raise ConfigError(
                f"directions {cfg.directions_source!r} apply only to MVG "
                "mechanisms"
            )
        if self.kind is MechanismKind.MVG_EQUIMODAL and q.m != q.n:
            raise ConfigError(
                f"equi-modal noise needs a square query, but this experiment's "
                f"query is {q.m}x{q.n}"
            )
        self.source_tag = source_tag
        self.source_val = source_val
        self.direction_data = direction_data
        self.direction_bounds = bounds
        if source_tag == "dp":
            self.p_directions = PrivacyParams(
                cfg.privacy.epsilon * source_val, cfg.privacy.delta * source_val
            )
            self.p_mechanism = PrivacyParams(
                cfg.privacy.epsilon * (1.0 - source_val),
                cfg.privacy.delta * (1.0 - source_val),
            )
        else:
            self.p_directions = None
            self.p_mechanism = cfg.privacy
        if is_mvg:
            self.theta = parse_theta_spec(theta_spec or cfg.theta_spec, q.m)
        else:
            self.theta = None
        if source_tag == "file":
            self.w_fixed = load_dense_csv(source_val)
        elif source_tag == "standard":
            self.w_fixed = np.eye(q.m)
        else:
            self.w_fixed = None
        if self.kind is MechanismKind.LAPLACE_IID:
            if q.kind is QueryKind.COVARIANCE:
                self.l1 = covariance_sensitivity_l1(bounds)
            else:
                self.l1 = identity_sensitivity_l1(bounds)

    def __call__(self, query_value: np.ndarray, stream: RandomStream) -> np.ndarray:
        if self.kind is MechanismKind.GAUSSIAN_IID:
            return gaussian_iid_baseline(query_value, self.q, self.p_mechanism, stream)
        if self.kind is MechanismKind.LAPLACE_IID:
            return laplace_iid_baseline(
                query_value, self.q, self.p_mechanism.epsilon, self.l1, stream
            )
        if self.w_fixed is not None:
            w = self.w_fixed
        else:
            w = derive_directions_dp(
                self.direction_data, self.p_directions, self.q.m, stream,
                bounds=self.direction_bounds,
            )
        if self.kind is MechanismKind.MVG_UNIMODAL:
            result = mvg_unimodal(query_value, self.q, self.p_mechanism,
                                  self.theta, w, stream)
        else:
            result = mvg_equimodal(query_value, self.q, self.p_mechanism,
                                   self.theta, w, stream)
        holds, lhs, rhs = check_condition(result.design, self.q, self.p_mechanism)
        if not holds:
            raise ConditionCheckError(
                f"trial design failed the privacy condition audit "
                f"(lhs={lhs:.12g}, rhs={rhs:.12g})"
            )
        return result.output


def _trial_seeds(cfg: ExperimentConfig):
    for t in range(cfg.trials):
        yield RandomStream((cfg.seed + t) % _SEED_MOD)


def _run_regression(cfg: ExperimentConfig, x: np.ndarray) -> EvalReport:
    num_rows, num_records = x.shape
    if num_rows < 2:
        raise ConfigError(
            "regression needs at least one feature column plus the target column"
        )
    n_train = int(round(cfg.train_fraction * num_records))
    if not 1 <= n_train < num_records:
        raise ConfigError(
            f"train fraction {cfg.train_fraction} leaves no valid split of "
            f"{num_records} records"
        )
    train, test = x[:, :n_train], x[:, n_train:]
    train_bounds = DataBounds(num_rows, n_train, cfg.bounds.lo, cfg.bounds.hi)
    q = QuerySpec(num_rows, n_train,
                  sensitivity=identity_sensitivity(train_bounds),
                  gamma=gamma_identity(train_bounds),
                  kind=QueryKind.IDENTITY)
    perturb = _Perturber(cfg, q, train_bounds, direction_data=train)
    values = []
    for stream in _trial_seeds(cfg):
        noisy = perturb(train, stream)
        rmse = ridge_regression_rmse(
            (noisy[:-1], noisy[-1]), (test[:-1], test[-1]), cfg.ridge_reg
        )
        values.append(rmse)
    return mean_ci95(values, "RMSE")


def _top_direction(estimate: np.ndarray) -> np.ndarray:
    sym = (estimate + estimate.T) / 2.0
    _, vecs = np.linalg.eigh(sym)
    return vecs[:, -1]


def _run_firstpc(cfg: ExperimentConfig, x: np.ndarray,
                 theta_spec: str | None = None,
                 metric_name: str = "delta_rho") -> EvalReport:
    num_features, num_records = x.shape
    s_bar = x @ x.T / num_records
    q = QuerySpec(num_features, num_features,
                  sensitivity=covariance_sensitivity(cfg.bounds),
                  gamma=gamma_covariance(cfg.bounds),
                  kind=QueryKind.COVARIANCE)
    perturb = _Perturber(cfg, q, cfg.bounds, direction_data=x, theta_spec=theta_spec)
    values = []
    for stream in _trial_seeds(cfg):
        noisy = perturb(s_bar, stream)
        values.append(delta_rho(_top_direction(noisy), s_bar))
    return mean_ci95(values, metric_name)


def _run_covest(cfg: ExperimentConfig, x: np.ndarray) -> EvalReport:
    num_features, num_records = x.shape
    s_bar = x @ x.T / num_records
    q = QuerySpec(num_features, num_records,
                  sensitivity=identity_sensitivity(cfg.bounds),
                  gamma=gamma_identity(cfg.bounds),
                  kind=QueryKind.IDENTITY)
    perturb = _Perturber(cfg, q, cfg.bounds, direction_data=x)
    values = []
    for stream in _trial_seeds(cfg):
        noisy = perturb(x, stream)
        s_tilde = noisy @ noisy.T / num_records
        values.append(rss(s_tilde, s_bar))
    return mean_ci95(values, "RSS")


def _run_ablation(cfg: ExperimentConfig, x: np.ndarray) -> list[EvalReport]:
    num_features = x.shape[0]
    tau, favored = _binary_parts(cfg.theta_spec)
    favored = sorted(set(favored))
    complement = [i for i in range(num_features) if i not in favored]
    if not complement:
        raise ConfigError("favored set covers every direction; nothing to ablate")
    arms = [
        (f"delta_rho[favored={'+'.join(map(str, favored))}]",
         f"binary:{tau}:{','.join(map(str, favored))}"),
        (f"delta_rho[complement={'+'.join(map(str, complement))}]",
         f"binary:{tau}:{','.join(map(str, complement))}"),
        ("delta_rho[uniform]", "uniform"),
    ]
    return [
        _run_firstpc(cfg, x, theta_spec=spec, metric_name=name)
        for name, spec in arms
    ]


def run_experiment(cfg: ExperimentConfig) -> EvalReport | list[EvalReport]:
    """Run one configured experiment end to end.

    Loads the dataset, audits it against the declared bounds (aborting before
    any sampling on a violation), runs the trial loop with per-trial seeds
    seed, seed+1, ..., and aggregates the metric. The ablation experiment
    returns one report per direction arm; the others return a single report.
    """
    x, _ = load_csv_matrix(cfg.dataset_path, cfg.csv_has_header)
    _audit_bounds(x, cfg.bounds)
    if cfg.experiment is Experiment.REGRESSION:
        return _run_regression(cfg, x)
    if cfg.experiment is Experiment.FIRST_PC:
        return _run_firstpc(cfg, x)
    if cfg.experiment is Experiment.COVARIANCE_ESTIMATION:
        return _run_covest(cfg, x)
    if cfg.experiment is Experiment.DIRECTION_ABLATION:
        return _run_ablation(cfg, x)
    raise ConfigError(f"unknown experiment {cfg.experiment!r}")


def format_significant(x: float, digits: int = 6) -> str:
    """Fixed-point rendering with a fixed count of significant digits.

    Unlike the %g format, trailing zeros are kept so output width is stable;
    zero renders as a bare 0.
    """
    if x == 0:
        return "0"
    if not math.isfinite(x):
        return repr(x)
    exponent = math.floor(math.log10(abs(x)))
    decimals = max(0, digits - 1 - exponent)
    return f"{x:.{decimals}f}"


class ReportFormat(enum.Enum):
    TEXT = "text"
    CSV = "csv"


def emit_report(report, fmt: ReportFormat = ReportFormat.TEXT) -> bytes:
    """Render one report or a sequence of reports as UTF-8 bytes.

    Text lines look like ``metric=RMSE mean=0.0162400 ci95=±0.000260000
    trials=100``; CSV output carries a header row plus one row per report.
    Values use six significant digits, so formatting is deterministic.
    """
    reports = [report] if isinstance(report, EvalReport) else list(report)
    if fmt is ReportFormat.TEXT:
        lines = [
            f"metric={r.metric_name} mean={format_significant(r.mean)} "
            f"ci95=±{format_significant(r.ci95_half_width)} trials={r.trials}"
            for r in reports
        ]
        return ("\n".join(lines) + "\n").encode("utf-8")
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["metric", "mean", "ci95", "trials"])
    for r in reports:
        writer.writerow([
            r.metric_name,
            format_significant(r.mean),
            format_significant(r.ci95_half_width),
            r.trials,
        ])
    return buffer.getvalue().encode("utf-8")
