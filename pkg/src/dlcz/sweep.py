"""Scenario configuration, parameter sweeps and CSV output.

A scenario is a JSON document::

    {
      "schema": 1,
      "kind": "distribution",
      "sweep": {"eta_s": {"start": 0.0, "stop": 1.0, "steps": 101}},
      "fixed": {"p_c": 0.01},
      "schemes": ["PNRD", "NRPD"],
      "oracle": {"enabled": false, "n_max": 12},
      "output": "fig5a.csv",
      "seed": 0
    }

Swept variables take either ``start/stop/steps`` or an explicit ``values``
list; several swept variables form a Cartesian grid in the order given.
"""

from __future__ import annotations

import concurrent.futures
import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np

from . import fock, herald, mitnu, protocols
from .channel import ChannelParams, SymmetricParams
from .errors import ConfigError, DLCZError, UndefinedFidelityError
from .herald import DetectionScheme

SCHEMA_VERSION = 1
UNDEF = "undef"
EXACT_TOL = 1e-10
MC_FLOOR = 1e-12  # rounding allowance when the sampled spread vanishes


@dataclass(frozen=True)
class KindSpec:
    variables: dict[str, float]  # name -> default
    uses_schemes: bool = True
    default_nmax: int = 12


KINDS: dict[str, KindSpec] = {
    "distribution": KindSpec({"p_c": 0.01, "eta_s": 1.0, "theta": 0.0}),
    "asymmetric-map": KindSpec(
        {"p_cL": 0.01, "p_cR": 0.01, "eta_L": 1.0, "eta_R": 1.0,
         "eta_1": 1.0, "eta_2": 1.0, "theta_L": 0.0, "theta_R": 0.0}
    ),
    "phase-noise": KindSpec(
        {"p_c": 0.01, "eta_s": 1.0, "sigma2": 0.0, "samples": 100000, "sigma_tol": 3.0,
         "G2": 0.01, "eta_f": 1.0, "coupling_ratio": mitnu.DEFAULT_COUPLING_RATIO,
         "linewidth_ratio": 0.5}
    ),
    "repeater": KindSpec({"eta_m": 1.0, "eta_d": 1.0}, default_nmax=3),
    "teleport": KindSpec({"eta_m": 1.0, "eta_d": 1.0, "d0": 1 / math.sqrt(2)}, default_nmax=3),
    "mitnu-compare": KindSpec(
        {"total_km": 0.0, "p_c": 0.01, "eta_d": 0.5, "G2": 0.01,
         "coupling_ratio": mitnu.DEFAULT_COUPLING_RATIO, "linewidth_ratio": 0.5,
         "loss_db_per_km": 0.2, "rate_hz": 500e3},
        uses_schemes=False,
    ),
}

# default grid when a kind's primary axis is not swept explicitly
DEFAULT_SWEEPS = {
    "mitnu-compare": {"total_km": {"start": 0.0, "stop": 100.0, "steps": 101}},
}


@dataclass
class ScenarioConfig:
    kind: str
    sweep: dict[str, list[float]]
    fixed: dict[str, float]
    schemes: list[DetectionScheme]
    oracle: bool = False
    n_max: int = 12
    output: Optional[str] = None
    seed: int = 0

    def point_values(self) -> list[dict[str, float]]:
        names = list(self.sweep)
        points = []
        for combo in itertools.product(*(self.sweep[n] for n in names)):
            values = dict(KINDS[self.kind].variables)
            values.update(self.fixed)
            values.update(zip(names, combo))
            points.append(values)
        return points


def _err(where: str, msg: str) -> ConfigError:
    return ConfigError(f"field '{where}': {msg}")


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise _err(where, f"expected a finite number, got {value!r}")
    return float(value)


def _axis(spec: Any, where: str) -> list[float]:
    if isinstance(spec, dict) and "values" in spec:
        vals = spec["values"]
        if not isinstance(vals, list) or not vals:
            raise _err(where + ".values", "expected a non-empty list")
        return [_number(v, f"{where}.values[{i}]") for i, v in enumerate(vals)]
    if not isinstance(spec, dict):
        raise _err(where, "expected an object with start/stop/steps or values")
    missing = {"start", "stop", "steps"} - set(spec)
    if missing:
        raise _err(where, f"missing {sorted(missing)}")
    start = _number(spec["start"], where + ".start")
    stop = _number(spec["stop"], where + ".stop")
    steps = spec["steps"]
    if isinstance(steps, bool) or not isinstance(steps, int) or steps < 1:
        raise _err(where + ".steps", "must be an integer >= 1")
    if stop < start:
        raise _err(where, "range not well ordered (stop < start)")
    if steps == 1:
        return [start]
    return [float(x) for x in np.linspace(start, stop, steps)]


def parse_config(doc: Any) -> ScenarioConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    if doc.get("schema") != SCHEMA_VERSION:
        raise _err("schema", f"expected {SCHEMA_VERSION}, got {doc.get('schema')!r}")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise _err("kind", f"expected one of {sorted(KINDS)}, got {kind!r}")
    spec = KINDS[kind]
    known = {"schema", "kind", "sweep", "fixed", "schemes", "oracle", "output", "seed"}
    extra = set(doc) - known
    if extra:
        raise _err(sorted(extra)[0], "unknown field")

    sweep_doc = doc.get("sweep", DEFAULT_SWEEPS.get(kind, {}))
    if not isinstance(sweep_doc, dict):
        raise _err("sweep", "expected an object")
    sweep = {}
    for name, axis in sweep_doc.items():
        if name not in spec.variables:
            raise _err(f"sweep.{name}", f"not a variable of kind '{kind}'")
        sweep[name] = _axis(axis, f"sweep.{name}")

    fixed_doc = doc.get("fixed", {})
    if not isinstance(fixed_doc, dict):
        raise _err("fixed", "expected an object")
    fixed = {}
    for name, value in fixed_doc.items():
        if name not in spec.variables:
            raise _err(f"fixed.{name}", f"not a variable of kind '{kind}'")
        if name in sweep:
            raise _err(f"fixed.{name}", "variable is also swept")
        fixed[name] = _number(value, f"fixed.{name}")

    schemes_doc = doc.get("schemes", ["PNRD", "NRPD"])
    if not isinstance(schemes_doc, list) or not schemes_doc:
        raise _err("schemes", "expected a non-empty list")
    try:
        schemes = [DetectionScheme.parse(s) for s in schemes_doc]
    except DLCZError as exc:
        raise _err("schemes", str(exc)) from None
    if not spec.uses_schemes:
        schemes = [herald.PNRD]

    oracle_doc = doc.get("oracle", {})
    if not isinstance(oracle_doc, dict):
        raise _err("oracle", "expected an object")
    enabled = oracle_doc.get("enabled", False)
    if not isinstance(enabled, bool):
        raise _err("oracle.enabled", "expected true or false")
    n_max = oracle_doc.get("n_max", spec.default_nmax)
    if isinstance(n_max, bool) or not isinstance(n_max, int) or n_max < 1:
        raise _err("oracle.n_max", "must be an integer >= 1")

    output = doc.get("output")
    if output is not None and not isinstance(output, str):
        raise _err("output", "expected a path string")
    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise _err("seed", "expected an unsigned 64-bit integer")

    return ScenarioConfig(
        kind=kind, sweep=sweep, fixed=fixed, schemes=schemes,
        oracle=enabled, n_max=n_max, output=output, seed=seed,
    )


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    try:
        return parse_config(doc)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


# per-kind row evaluation


@dataclass
class Check:
    metric: str
    residual: float
    tolerance: float


@dataclass
class PointResult:
    values: dict[str, Any]
    checks: list[Check] = field(default_factory=list)


def _safe(fn: Callable[[], float]) -> Optional[float]:
    try:
        return fn()
    except UndefinedFidelityError:
        return None


def _compare(checks: list[Check], metric: str, formula: Optional[float], oracle: Optional[float], tol: float):
    if formula is None and oracle is None:
        return
    if formula is None or oracle is None:
        checks.append(Check(metric, math.inf, tol))
        return
    checks.append(Check(metric, abs(formula - oracle), tol))


def _distribution_metrics(cp: ChannelParams, s: DetectionScheme, values: dict, checks: list, oracle: bool, n_max: int):
    rep = herald.herald_report(cp, s)
    values.update(
        P1=rep.P1, P2=rep.P2, P_herald=rep.P_herald, F1=rep.F1, F2=rep.F2,
        P_success=rep.P_success, F_opt1=rep.F_opt1, F_opt2=rep.F_opt2,
    )
    if oracle:
        orc = fock.oracle_distribution(cp, s, n_max)
        tol = fock.combined_tail_bound((cp.p_cL, cp.p_cR), n_max) + EXACT_TOL
        values.update(oracle_P1=orc.P1, oracle_F1=orc.F1, oracle_P_success=orc.P_success)
        for name in ("P1", "P2", "F1", "F2", "P_success"):
            _compare(checks, name, getattr(rep, name), getattr(orc, name), tol)


def _eval_distribution(v: dict, s: DetectionScheme, oracle: bool, n_max: int, rng) -> PointResult:
    cp = SymmetricParams(v["p_c"], v["eta_s"], v["theta"]).to_channel()
    res = PointResult({"p_c": v["p_c"], "eta_s": v["eta_s"], "theta": v["theta"], "scheme": s.value})
    _distribution_metrics(cp, s, res.values, res.checks, oracle, n_max)
    return res


def _eval_asymmetric(v: dict, s: DetectionScheme, oracle: bool, n_max: int, rng) -> PointResult:
    names = list(KINDS["asymmetric-map"].variables)
    cp = ChannelParams(**{n: v[n] for n in names})
    res = PointResult({**{n: v[n] for n in names}, "scheme": s.value})
    _distribution_metrics(cp, s, res.values, res.checks, oracle, n_max)
    if cp.a_L + cp.a_R > 0:
        d_L, _ = herald.optimal_state_coeffs(cp, 1)
        res.values["opt_weight_L"] = abs(d_L) ** 2
    else:
        res.values["opt_weight_L"] = None
    return res


def _eval_phase_noise(v: dict, s: DetectionScheme, oracle: bool, n_max: int, rng) -> PointResult:
    cp = SymmetricParams(v["p_c"], v["eta_s"]).to_channel()
    samples = int(v["samples"])
    k = v["sigma_tol"]
    res = PointResult({"p_c": v["p_c"], "eta_s": v["eta_s"], "sigma2": v["sigma2"], "scheme": s.value})
    closed = _safe(lambda: herald.phase_averaged_fidelity(cp, s, v["sigma2"]))
    res.values["F_closed"] = closed
    if closed is not None:
        mean, se = herald.phase_averaged_fidelity_mc(cp, s, v["sigma2"], samples, rng)
        res.values.update(F_mc=mean, F_mc_stderr=se)
        res.checks.append(Check("F_mc", abs(mean - closed), k * se + MC_FLOOR))
    else:
        res.values.update(F_mc=None, F_mc_stderr=None)
    mp = mitnu.MitNuParams(
        G2=v["G2"], eta_f=v["eta_f"], coupling_ratio=v["coupling_ratio"],
        linewidth_ratio=v["linewidth_ratio"],
    )
    m_closed = _safe(lambda: mitnu.phase_averaged_mitnu(mp, v["sigma2"]))
    res.values["mitnu_F_closed"] = m_closed
    if m_closed is not None:
        mean, se = mitnu.phase_averaged_mitnu_mc(mp, v["sigma2"], samples, rng)
        res.values.update(mitnu_F_mc=mean, mitnu_F_mc_stderr=se)
        res.checks.append(Check("mitnu_F_mc", abs(mean - m_closed), k * se + MC_FLOOR))
    else:
        res.values.update(mitnu_F_mc=None, mitnu_F_mc_stderr=None)
    return res


def _module(v: dict, s: DetectionScheme) -> protocols.MeasurementModule:
    eta_d = v["eta_d"]
    if not 0 < eta_d <= 1 or v["eta_m"] > eta_d:
        raise ConfigError("need 0 < eta_d <= 1 and eta_m <= eta_d")
    return protocols.MeasurementModule(eta_c=v["eta_m"] / eta_d, eta_d=eta_d, scheme=s)


def _eval_repeater(v: dict, s: DetectionScheme, oracle: bool, n_max: int, rng) -> PointResult:
    m = _module(v, s)
    p = protocols.swap_component_probabilities(m)
    rep = protocols.repeater_metrics(m)
    res = PointResult({
        "eta_m": v["eta_m"], "eta_d": v["eta_d"], "scheme": s.value,
        "P00": p[0], "P01": p[1], "P10": p[2], "P11": p[3],
        "P_herald": rep.P_herald, "P_success": rep.P_success, "F_R": _safe(lambda: rep.F),
    })
    if oracle:
        orc = fock.oracle_swap(m, n_max)
        res.values.update(oracle_P_herald=orc.P_herald, oracle_F_R=_safe(lambda: orc.F))
        _compare(res.checks, "P_herald", rep.P_herald, orc.P_herald, EXACT_TOL)
        _compare(res.checks, "P_success", rep.P_success, orc.P_success, EXACT_TOL)
        _compare(res.checks, "F_R", res.values["F_R"], res.values["oracle_F_R"], EXACT_TOL)
    return res


def _eval_teleport(v: dict, s: DetectionScheme, oracle: bool, n_max: int, rng) -> PointResult:
    m = _module(v, s)
    rep = protocols.teleport_metrics(m)
    res = PointResult({
        "eta_m": v["eta_m"], "eta_d": v["eta_d"], "scheme": s.value,
        "P_herald": rep.P_herald, "P_success": rep.P_success, "F_T": _safe(lambda: rep.F),
    })
    if oracle:
        d0 = v["d0"]
        if not 0.0 <= d0 <= 1.0:
            raise ConfigError("field 'd0': must lie in [0, 1]")
        orc = fock.oracle_teleport(m, d0, math.sqrt(1.0 - d0 * d0), n_max)
        res.values.update(oracle_P_herald=orc.P_herald, oracle_F_T=_safe(lambda: orc.F))
        _compare(res.checks, "P_herald", rep.P_herald, orc.P_herald, EXACT_TOL)
        _compare(res.checks, "P_success", rep.P_success, orc.P_success, EXACT_TOL)
        _compare(res.checks, "F_T", res.values["F_T"], res.values["oracle_F_T"], EXACT_TOL)
    return res


def _eval_mitnu(v: dict, s: DetectionScheme, oracle: bool, n_max: int, rng) -> PointResult:
    template = mitnu.MitNuParams(
        G2=v["G2"], coupling_ratio=v["coupling_ratio"], linewidth_ratio=v["linewidth_ratio"]
    )
    (row,) = mitnu.throughput_comparison(
        [v["total_km"]], p_c=v["p_c"], eta_d=v["eta_d"], mitnu=template,
        loss_db_per_km=v["loss_db_per_km"], rate_hz=v["rate_hz"],
    )
    res = PointResult({
        "total_km": row.total_km, "dlcz_throughput": row.dlcz_throughput,
        "mitnu_throughput": row.mitnu_throughput, "dlcz_F": row.dlcz_F, "mitnu_F": row.mitnu_F,
    })
    if oracle:
        eta = mitnu.db_to_transmissivity(v["loss_db_per_km"] * v["total_km"] / 2.0)
        p_ref, f_ref = mitnu.mitnu_metrics_decimal(
            mitnu.MitNuParams(G2=v["G2"], eta_f=eta, coupling_ratio=v["coupling_ratio"],
                              linewidth_ratio=v["linewidth_ratio"])
        )
        res.values.update(reference_mitnu_throughput=v["rate_hz"] * p_ref, reference_mitnu_F=f_ref)
        scale = max(1.0, v["rate_hz"])
        _compare(res.checks, "mitnu_throughput", row.mitnu_throughput, v["rate_hz"] * p_ref, EXACT_TOL * scale)
        _compare(res.checks, "mitnu_F", row.mitnu_F, f_ref, EXACT_TOL)
    return res


EVALUATORS = {
    "distribution": _eval_distribution,
    "asymmetric-map": _eval_asymmetric,
    "phase-noise": _eval_phase_noise,
    "repeater": _eval_repeater,
    "teleport": _eval_teleport,
    "mitnu-compare": _eval_mitnu,
}


@dataclass
class SweepResult:
    kind: str
    rows: list[dict[str, Any]]
    columns: list[str]
    checks: list[list[Check]]
    seed: int
    oracle: bool
    n_max: int

    @property
    def breaches(self) -> list[tuple[int, Check]]:
        return [(i, c) for i, cs in enumerate(self.checks) for c in cs if not c.residual <= c.tolerance]

    def residual_summary(self) -> dict[str, dict[str, float]]:
        by_metric: dict[str, list[float]] = {}
        for cs in self.checks:
            for c in cs:
                by_metric.setdefault(c.metric, []).append(c.residual)
        return {
            m: {"max": max(r), "mean": sum(r) / len(r), "count": len(r)}
            for m, r in by_metric.items()
        }


def _evaluate(task: tuple) -> PointResult:
    kind, values, scheme, oracle, n_max, seed, index = task
    rng = np.random.default_rng([seed, index])
    try:
        return EVALUATORS[kind](values, scheme, oracle, n_max, rng)
    except ConfigError:
        raise
    except DLCZError as exc:
        raise ConfigError(f"point {index}: {exc}") from None


def run_scenario(
    cfg: ScenarioConfig,
    *,
    oracle: Optional[bool] = None,
    n_max: Optional[int] = None,
    seed: Optional[int] = None,
    jobs: int = 1,
) -> SweepResult:
    """Evaluate every grid point; rows come back in sweep order whatever ``jobs`` is."""
    use_oracle = cfg.oracle if oracle is None else oracle
    depth = cfg.n_max if n_max is None else n_max
    seed = cfg.seed if seed is None else seed
    tasks = []
    for values in cfg.point_values():
        for s in cfg.schemes:
            tasks.append((cfg.kind, values, s, use_oracle, depth, seed, len(tasks)))
    if jobs > 1 and len(tasks) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_evaluate, tasks))
    else:
        results = [_evaluate(t) for t in tasks]

    columns: list[str] = []
    for r in results:
        for key in r.values:
            if key not in columns:
                columns.append(key)
    rows = []
    checks = []
    for r in results:
        row = {c: r.values.get(c) for c in columns}
        if use_oracle:
            worst = max((c.residual for c in r.checks), default=0.0)
            tol = min((c.tolerance for c in r.checks), default=0.0)
            row["max_residual"] = worst
            row["tolerance"] = tol
            row["within_tolerance"] = all(c.residual <= c.tolerance for c in r.checks)
        elif r.checks:  # Monte-Carlo checks run without the oracle
            row["within_tolerance"] = all(c.residual <= c.tolerance for c in r.checks)
        rows.append(row)
        checks.append(r.checks)
    if rows:
        columns = list(rows[0].keys())
    return SweepResult(cfg.kind, rows, columns, checks, seed, use_oracle, depth)


def _cell(value: Any) -> str:
    if value is None:
        return UNDEF
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return UNDEF
        return repr(value)
    return str(value)


def to_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(result.columns)
    for row in result.rows:
        writer.writerow([_cell(row.get(c)) for c in result.columns])
    return buf.getvalue()


def metadata(result: SweepResult) -> dict[str, Any]:
    return {
        "schema": SCHEMA_VERSION,
        "kind": result.kind,
        "seed": result.seed,
        "oracle": result.oracle,
        "n_max": result.n_max,
        "rows": len(result.rows),
        "columns": result.columns,
    }


def write_outputs(result: SweepResult, path: str | Path) -> None:
    """Write the CSV and its ``.meta.json`` sidecar (UTF-8, LF)."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(to_csv(result))
    meta = Path(str(path) + ".meta.json")
    with open(meta, "w", encoding="utf-8", newline="") as fh:
        fh.write(json.dumps(metadata(result), indent=2, sort_keys=True) + "\n")
