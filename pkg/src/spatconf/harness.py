"""Monte Carlo experiment runner: configuration, replication loop,
aggregation and report files."""

from dataclasses import asdict, dataclass, field, fields
import csv
import io
import json
import logging
import os
import platform
import time

import numpy as np

from . import __version__
from .dgp import (
    DENSE_N_CAP,
    EigenScenarioConfig,
    FixedConfounderConfig,
    gen_clustered_linear,
    gen_eigen_scenario,
    gen_fixed_confounder,
    gen_random_confounder,
    simulate_confounder_surface,
)
from .estimators import fit_grouped_re
from .inference import CI_METHODS, analytic_ci, parametric_spatial_bootstrap, subsample_se
from .kernels import KernelSpec, covariance_matrix
from .linalg import spd_factor
from .mercer import predicted_gls_bias
from .models import (
    GLSRegressor,
    GPRidgeRegressor,
    GroupedRERegressor,
    OLSRegressor,
    ProfileGLSRegressor,
    RestrictedSpatialRegressor,
    SpatialPlusRegressor,
    SplinePLMRegressor,
)
from .oracles import cross_term_diag, exact_gls_bias, ols_asymptotic_bias, quadform_diag, quadform_lower_bound
from .rng import RngStream
from .svg import bias_histograms_svg, scatter_svg

__all__ = [
    "SCENARIOS",
    "ESTIMATORS",
    "ConfigError",
    "ReplicationFailure",
    "ExperimentConfig",
    "ExperimentReport",
    "load_config",
    "run_experiment",
    "emit_report",
    "summarize_rows",
    "read_rows",
    "rough_function",
    "diagnostic_summary",
    "run_diagnostics",
]

logger = logging.getLogger(__name__)

SCENARIOS = ("fixed_confounder", "random_confounder", "clustered", "eigen")
ESTIMATORS = (
    "ols", "rsr", "gls_known", "gls_profile", "gls_vecchia",
    "gp_ridge", "gam", "gam_fx", "spatial_plus", "grouped_re",
)
DEFAULT_ESTIMATORS = {
    "fixed_confounder": ["ols", "gls_profile", "gam", "gam_fx", "spatial_plus"],
    "random_confounder": ["ols", "gls_profile", "gam", "gam_fx", "spatial_plus"],
    "clustered": ["ols", "grouped_re", "gls_profile"],
    "eigen": ["ols", "gls_known"],
}
DEFAULT_CI = {
    "gls_profile": "parametric_bootstrap",
    "gls_vecchia": "parametric_bootstrap",
    "grouped_re": "subsample",
}
REP_COLUMNS = ["scenario", "rep", "estimator", "beta_hat", "bias", "ci_lo", "ci_hi", "covered"]
SUMMARY_COLUMNS = ["estimator", "mean_bias", "sd_bias", "coverage"]
DIAG_COLUMNS = ["rep", "n", "statistic", "value"]
EIGEN_COLUMNS = ["rep", "n", "exact_bias", "predicted_bias"]
FAILURE_LIMIT = 0.05


class ConfigError(ValueError):
    pass


class ReplicationFailure(RuntimeError):
    def __init__(self, report, rate):
        self.report = report
        self.rate = rate
        super().__init__(f"{rate:.1%} of replications failed (limit {FAILURE_LIMIT:.0%})")


@dataclass
class ExperimentConfig:
    scenario: str
    n: int | None = None
    m: int = 300
    k: int = 10
    kmax: int = 5
    kappa2: float = 1.0 / 16
    sigma0_2: float = 1.0
    nugget: float = 2.0
    gamma2: float = 1.0
    phi: float = 0.25
    ell: float = 1.0
    beta: float = 1.0
    smoother_rank: int = 200
    seed: int = 0
    replications: int = 300
    estimators: list | None = None
    ci_method: str | dict | None = None
    ci_level: float = 0.95
    boot_reps: int = 200
    subsample_fraction: float = 0.05
    subsample_reps: int = 120
    lambda_grid_lo: float = 1e-8
    lambda_grid_hi: float = 1e4
    lambda_grid_len: int = 40
    n_sweep: list | None = None
    dense_cap: int = DENSE_N_CAP
    gls_family: str = "exponential"
    gls_likelihood: str = "dense"
    vecchia_neighbors: int = 15
    gp_ridge_tau2: float = 1e6
    intercept: bool | None = None

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; choose from {SCENARIOS}")
        if self.n is None:
            self.n = 3000 if self.scenario == "eigen" else 2000
        if self.estimators is None:
            self.estimators = list(DEFAULT_ESTIMATORS[self.scenario])
        bad = [e for e in self.estimators if e not in ESTIMATORS]
        if bad:
            raise ConfigError(f"unknown estimator ids {bad}")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if self.intercept is None:
            self.intercept = self.scenario != "eigen"
        if self.gls_likelihood not in ("dense", "vecchia"):
            raise ConfigError("gls_likelihood must be 'dense' or 'vecchia'")
        if isinstance(self.ci_method, str) and self.ci_method not in CI_METHODS:
            raise ConfigError(f"unknown ci_method {self.ci_method!r}")
        if isinstance(self.ci_method, dict):
            for key, val in self.ci_method.items():
                if key not in ESTIMATORS or val not in CI_METHODS:
                    raise ConfigError(f"bad ci_method entry {key!r}: {val!r}")
        if not 0 < self.ci_level < 1:
            raise ConfigError("ci_level must lie in (0, 1)")
        for nn in self.sizes:
            self._check_dense(nn)

    @property
    def sizes(self):
        if self.n_sweep:
            return [int(v) for v in self.n_sweep]
        if self.scenario == "clustered":
            return [self.m * self.k]
        return [int(self.n)]

    def _check_dense(self, n):
        dense = {"gls_known", "gp_ridge"}
        if self.gls_likelihood == "dense":
            dense.add("gls_profile")
        if n > self.dense_cap and dense & set(self.estimators):
            raise ConfigError(
                f"n={n} exceeds dense_cap={self.dense_cap}; use gls_vecchia or gls_likelihood='vecchia'"
            )

    def interval_method(self, estimator):
        if isinstance(self.ci_method, str):
            return self.ci_method
        if isinstance(self.ci_method, dict) and estimator in self.ci_method:
            return self.ci_method[estimator]
        return DEFAULT_CI.get(estimator, "analytic")

    @property
    def lambda_grid(self):
        return (self.lambda_grid_lo, self.lambda_grid_hi, self.lambda_grid_len)

    def to_dict(self):
        return asdict(self)


def load_config(source):
    """Parse a JSON config (path, JSON text or dict); unknown keys are errors."""
    if isinstance(source, dict):
        raw = dict(source)
    else:
        text = source
        if isinstance(source, (str, os.PathLike)) and os.path.exists(source):
            with open(source, encoding="utf-8") as fh:
                text = fh.read()
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON config: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {unknown}")
    if "scenario" not in raw:
        raise ConfigError("config needs a 'scenario'")
    try:
        return ExperimentConfig(**raw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


@dataclass
class ExperimentReport:
    config: dict
    rows: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    eigen: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    @property
    def summary(self):
        return summarize_rows(self.rows)

    def sizes(self):
        return sorted({r["n"] for r in self.rows} | {r["n"] for r in self.eigen})

    def for_n(self, n):
        keep = lambda rows: [r for r in rows if r["n"] == n]
        return ExperimentReport(
            self.config, keep(self.rows), keep(self.diagnostics), keep(self.eigen), keep(self.errors), self.provenance
        )


def summarize_rows(rows):
    """Per-estimator mean/sd of bias and coverage (mean of ``covered``)."""
    out = []
    for name in dict.fromkeys(r["estimator"] for r in rows):
        sub = [r for r in rows if r["estimator"] == name]
        bias = np.array([r["bias"] for r in sub], dtype=float)
        cov = [r["covered"] for r in sub if r["covered"] is not None]
        out.append({
            "estimator": name,
            "mean_bias": float(np.mean(bias)) if bias.size else float("nan"),
            "sd_bias": float(np.std(bias, ddof=1)) if bias.size > 1 else float("nan"),
            "coverage": float(np.mean(cov)) if cov else float("nan"),
            "mean_abs_bias": float(np.mean(np.abs(bias))) if bias.size else float("nan"),
            "median_abs_bias": float(np.median(np.abs(bias))) if bias.size else float("nan"),
            "reps": int(bias.size),
        })
    return out


# ---------------------------------------------------------------------------
# estimator registry


def _make_estimator(name, cfg, family):
    scale = cfg.ell if family == "squared_exponential" else cfg.phi
    known = KernelSpec(family, cfg.gamma2, scale, cfg.nugget)
    rank = cfg.smoother_rank
    grid = {"lo": cfg.lambda_grid_lo, "hi": cfg.lambda_grid_hi, "num": cfg.lambda_grid_len}
    factories = {
        "ols": lambda: OLSRegressor(cfg.intercept),
        "rsr": lambda: RestrictedSpatialRegressor(rank, cfg.intercept),
        "gls_known": lambda: GLSRegressor(known, cfg.intercept),
        "gls_profile": lambda: ProfileGLSRegressor(family, cfg.intercept, cfg.gls_likelihood, cfg.vecchia_neighbors),
        "gls_vecchia": lambda: GLSRegressor(known, cfg.intercept, "vecchia", cfg.vecchia_neighbors),
        "gp_ridge": lambda: GPRidgeRegressor(known, cfg.gp_ridge_tau2, cfg.intercept),
        "gam": lambda: SplinePLMRegressor(rank, "gcv", grid),
        "gam_fx": lambda: SplinePLMRegressor(rank, "none"),
        "spatial_plus": lambda: SpatialPlusRegressor(rank, grid),
        "grouped_re": lambda: GroupedRERegressor(cfg.intercept),
    }
    return factories[name]()


def _fit(model, data):
    return model.fit(data.X, data.Y, locations=data.locations, groups=data.groups).result_


def _interval(name, model, fit, data, cfg, rng, family):
    method = cfg.interval_method(name)
    level = cfg.ci_level
    if method == "analytic":
        return analytic_ci(fit, level)
    if method == "parametric_bootstrap":
        return parametric_spatial_bootstrap(
            data.X, data.Y, data.locations, fit, cfg.boot_reps, rng, level, cfg.intercept
        )[1]
    groups = data.groups if data.groups is not None else None

    def refit(X, y, idx):
        if name == "grouped_re":
            return fit_grouped_re(X[idx], y[idx], groups[idx], cfg.intercept).beta_hat
        sub = _subset(data, idx)
        return _fit(_make_estimator(name, cfg, family), sub).beta_hat

    return subsample_se(
        refit, data.X, data.Y, cfg.subsample_fraction, cfg.subsample_reps, rng,
        groups=groups, level=level, full_estimate=fit.beta_hat,
    )[1]


def _subset(data, idx):
    from .dgp import SimulatedDataset

    pick = lambda v: None if v is None else v[idx]
    return SimulatedDataset(
        data.locations.subset(idx), data.X[idx], data.Y[idx], data.beta_true, data.g_true[idx],
        pick(data.h_true), data.scenario, pick(data.groups), pick(data.eta), pick(data.eps),
    )


# ---------------------------------------------------------------------------
# replication loop


def _scenario_family(cfg):
    return "squared_exponential" if cfg.scenario == "eigen" else cfg.gls_family


def _fixed_cfg(cfg, n):
    return FixedConfounderConfig(
        n=n, gamma2=cfg.gamma2, phi=cfg.phi, smoother_rank=cfg.smoother_rank, beta=cfg.beta,
        lambda_grid=cfg.lambda_grid, dense_cap=cfg.dense_cap, vecchia_neighbors=cfg.vecchia_neighbors,
    )


def _eigen_cfg(cfg, n):
    return EigenScenarioConfig(
        n=n, ell=cfg.ell, kmax=cfg.kmax, kappa2=cfg.kappa2, sigma0_2=cfg.sigma0_2,
        nugget=cfg.nugget, beta=cfg.beta,
    )


def _stream(cfg, rep, n):
    rng = RngStream(cfg.seed, rep)
    return rng.substream(f"n={n}") if cfg.n_sweep else rng


def _run_rep(cfg, rep, n, frozen):
    rng = _stream(cfg, rep, n)
    family = _scenario_family(cfg)
    rows, diags, eigen, errors = [], [], [], []
    extra = None
    if cfg.scenario == "fixed_confounder":
        data = gen_fixed_confounder(_fixed_cfg(cfg, n), rng, frozen)
    elif cfg.scenario == "random_confounder":
        data = gen_random_confounder(_fixed_cfg(cfg, n), rng)
    elif cfg.scenario == "clustered":
        data = gen_clustered_linear(cfg.m, cfg.k, rng, cfg.beta)
    else:
        data, E, c_g, c_h = gen_eigen_scenario(_eigen_cfg(cfg, n), rng)
        extra = (E, c_g, c_h)

    if extra is not None:
        E, c_g, c_h = extra
        spec = KernelSpec("squared_exponential", cfg.gamma2, cfg.ell, cfg.nugget)
        F = spd_factor(covariance_matrix(spec, data.locations))
        exact = exact_gls_bias(data.X, F, data.g_true)
        denom = float(data.X @ F.solve(data.X)) / n
        pred = predicted_gls_bias(c_g, c_h, E, cfg.sigma0_2, denom, n)
        eigen.append({"rep": rep, "n": n, "exact_bias": exact, "predicted_bias": pred})
        diags += [
            {"rep": rep, "n": n, "statistic": "exact_gls_bias", "value": exact},
            {"rep": rep, "n": n, "statistic": "predicted_gls_bias", "value": pred},
        ]
    diags.append({"rep": rep, "n": n, "statistic": "ols_asymptotic_bias",
                  "value": ols_asymptotic_bias(data.X, data.g_true)})

    for name in cfg.estimators:
        try:
            model = _make_estimator(name, cfg, family)
            fit = _fit(model, data)
            lo, hi = _interval(name, model, fit, data, cfg, rng.substream(f"ci:{name}"), family)
        except Exception as exc:  # recorded per row; the run continues
            errors.append({"rep": rep, "n": n, "estimator": name, "kind": type(exc).__name__, "message": str(exc)})
            continue
        bias = fit.beta_hat - data.beta_true
        rows.append({
            "scenario": cfg.scenario, "rep": rep, "n": n, "estimator": name,
            "beta_hat": fit.beta_hat, "bias": bias, "ci_lo": lo, "ci_hi": hi,
            "covered": bool(lo <= data.beta_true <= hi),
        })
    return rows, diags, eigen, errors


def _frozen_surface(cfg, n):
    if cfg.scenario != "fixed_confounder":
        return None
    return simulate_confounder_surface(_fixed_cfg(cfg, n), _stream(cfg, 0, n).substream("confounder"))


def run_experiment(cfg, threads=1):
    """Run all replications (and sweep sizes) of an experiment.

    Replication ``r`` uses stream ``r``; the fixed-confounder surface comes
    from stream 0.  Estimator failures are recorded per row; the run raises
    :class:`ReplicationFailure` when more than 5% of replications had one.
    """
    if not isinstance(cfg, ExperimentConfig):
        cfg = load_config(cfg)
    start = time.perf_counter()
    report = ExperimentReport(cfg.to_dict())
    for n in cfg.sizes:
        frozen = _frozen_surface(cfg, n)
        reps = range(1, cfg.replications + 1)
        if threads and threads > 1:
            from joblib import Parallel, delayed

            results = Parallel(n_jobs=threads)(delayed(_run_rep)(cfg, r, n, frozen) for r in reps)
        else:
            results = [_run_rep(cfg, r, n, frozen) for r in reps]
        for rows, diags, eigen, errors in results:
            report.rows += rows
            report.diagnostics += diags
            report.eigen += eigen
            report.errors += errors
    report.provenance = {
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "wall_time_s": time.perf_counter() - start,
    }
    total = cfg.replications * len(cfg.sizes)
    failed = len({(e["n"], e["rep"]) for e in report.errors})
    if failed / total > FAILURE_LIMIT:
        raise ReplicationFailure(report, failed / total)
    return report


# ---------------------------------------------------------------------------
# replicated diagnostics (cross term, quadratic form)

DIAG_LEMMAS = ("cross", "quadform")


def rough_function(s, freq=30.0):
    """A fixed, highly oscillating function of location with unit mean square."""
    return np.sqrt(2.0) * np.sin(freq * np.asarray(s, dtype=float).reshape(len(s), -1)[:, 0])


def _diag_rep(lemma, n, rep, seed, cfg):
    data, _, _, _ = gen_eigen_scenario(cfg, RngStream(seed, rep).substream(f"n={n}"))
    spec = KernelSpec("squared_exponential", 1.0, cfg.ell, cfg.nugget)
    F = spd_factor(covariance_matrix(spec, data.locations))
    row = lambda stat, v: {"rep": rep, "n": n, "statistic": stat, "value": float(v)}
    if lemma == "cross":
        rough = rough_function(data.locations.coords)
        return [
            row("cross_rough", cross_term_diag(rough, F, data.eps)),
            row("cross_smooth", cross_term_diag(data.h_true, F, data.eps)),
            row("cross_eta", cross_term_diag(data.eta, F, data.eps)),
        ]
    value = quadform_diag(data.eta, F, cfg.kappa2)
    return [
        row("quadform", value),
        row("quadform_bound", quadform_lower_bound(cfg.kappa2, spec.variance, spec.nugget)),
    ]


def run_diagnostics(lemma, n_sweep=(250, 500, 1000, 2000), reps=200, seed=0, threads=1):
    """Replicated diagnostic statistics on the eigen scenario with ``Sigma = K + 2 I``.

    ``cross`` reports ``(1/n) h^T inv(Sigma) eps`` for a rough ``h``
    (``cross_rough``), the scenario's smooth ``h`` (``cross_smooth``) and
    ``h = eta`` (``cross_eta``); ``quadform`` reports ``(1/n) eta^T inv(Sigma) eta``
    with its lower bound.  Returns an :class:`ExperimentReport` whose rows are
    in ``diagnostics``.
    """
    if lemma not in DIAG_LEMMAS:
        raise ConfigError(f"lemma must be one of {DIAG_LEMMAS}")
    if reps < 2:
        raise ConfigError("reps must be >= 2")
    start = time.perf_counter()
    report = ExperimentReport({"lemma": lemma, "n_sweep": list(n_sweep), "reps": reps, "seed": seed})
    for n in n_sweep:
        cfg = EigenScenarioConfig(n=int(n))
        if threads and threads > 1:
            from joblib import Parallel, delayed

            chunks = Parallel(n_jobs=threads)(delayed(_diag_rep)(lemma, int(n), r, seed, cfg) for r in range(1, reps + 1))
        else:
            chunks = [_diag_rep(lemma, int(n), r, seed, cfg) for r in range(1, reps + 1)]
        for c in chunks:
            report.diagnostics += c
    report.provenance = {
        "config": report.config, "seed": seed, "version": __version__,
        "wall_time_s": time.perf_counter() - start,
    }
    return report


def diagnostic_summary(rows):
    """(n, statistic) -> mean, sd, min, mc_se over replications."""
    keys = dict.fromkeys((r["n"], r["statistic"]) for r in rows)
    out = []
    for n, stat in keys:
        v = np.array([r["value"] for r in rows if r["n"] == n and r["statistic"] == stat])
        sd = float(np.std(v, ddof=1)) if v.size > 1 else float("nan")
        out.append({"n": n, "statistic": stat, "mean": float(v.mean()), "sd": sd,
                    "min": float(v.min()), "mc_se": sd / np.sqrt(v.size), "reps": int(v.size)})
    return out


# ---------------------------------------------------------------------------
# output


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return "" if np.isnan(v) else format(float(v), ".17g")
    return str(v)


def _csv_text(columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return None if np.isnan(obj) else float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _emit_single(report, out_dir, formats):
    os.makedirs(out_dir, exist_ok=True)
    written = []
    summary = report.summary
    if "csv" in formats:
        files = {"diagnostics.csv": _csv_text(DIAG_COLUMNS, report.diagnostics)}
        if "lemma" not in report.config:
            files["reps.csv"] = _csv_text(REP_COLUMNS, report.rows)
            files["summary.csv"] = _csv_text(SUMMARY_COLUMNS, summary)
        if report.eigen:
            files["eigen.csv"] = _csv_text(EIGEN_COLUMNS, report.eigen)
        if report.diagnostics:
            files["diagnostics_summary.csv"] = _csv_text(
                ["n", "statistic", "mean", "sd", "min", "mc_se", "reps"], diagnostic_summary(report.diagnostics)
            )
        if report.errors:
            files["errors.csv"] = _csv_text(["rep", "n", "estimator", "kind", "message"], report.errors)
        for name, text in files.items():
            _write(os.path.join(out_dir, name), text)
            written.append(os.path.join(out_dir, name))
    if "json" in formats:
        doc = {
            "provenance": report.provenance,
            "summary": summary,
            "rows": report.rows,
            "diagnostics": report.diagnostics,
            "eigen": report.eigen,
            "errors": report.errors,
        }
        path = os.path.join(out_dir, "report.json")
        _write(path, json.dumps(_jsonable(doc), indent=2, sort_keys=True))
        written.append(path)
    if "svg" in formats:
        by_est = {}
        for r in report.rows:
            by_est.setdefault(r["estimator"], []).append(r["bias"])
        path = os.path.join(out_dir, "bias_hist.svg")
        _write(path, bias_histograms_svg(by_est))
        written.append(path)
        if report.eigen:
            path = os.path.join(out_dir, "eigen_scatter.svg")
            pts = [(e["predicted_bias"], e["exact_bias"]) for e in report.eigen]
            _write(path, scatter_svg(pts, "predicted bias", "exact bias"))
            written.append(path)
    return written


def emit_report(report, out_dir, formats=("csv", "json")):
    """Write report files; sweeps get one sub-directory per ``n`` plus ``sweep.csv``."""
    formats = set(formats)
    bad = formats - {"csv", "json", "svg"}
    if bad:
        raise ValueError(f"unknown formats {sorted(bad)}")
    sizes = report.sizes()
    if len(sizes) <= 1:
        return _emit_single(report, out_dir, formats)
    written = []
    sweep = []
    for n in sizes:
        sub = report.for_n(n)
        written += _emit_single(sub, os.path.join(out_dir, f"n{n}"), formats)
        for s in sub.summary:
            sweep.append({"n": n, **s})
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "sweep.csv")
    _write(path, _csv_text(["n", "estimator", "mean_bias", "sd_bias", "median_abs_bias", "coverage"], sweep))
    return written + [path]


def read_rows(path):
    """Read a per-replication CSV back into row dicts."""
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        for r in csv.DictReader(fh):
            rows.append({
                "scenario": r["scenario"], "rep": int(r["rep"]), "estimator": r["estimator"],
                "beta_hat": float(r["beta_hat"]), "bias": float(r["bias"]),
                "ci_lo": float(r["ci_lo"]), "ci_hi": float(r["ci_hi"]), "covered": r["covered"] == "1",
            })
    return rows
