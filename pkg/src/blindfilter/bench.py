"""
Monte-Carlo comparison of recovery methods over an SNR sweep.

For every scenario and trial a ground truth ``x`` and a standard noise draw
``zeta`` are generated from seeds derived from the master seed. Every
method then sees ``y = x + sigma(snr) zeta`` for each SNR level, so methods
(and SNR levels) are compared on common random numbers.

Plan files
----------
INI format (``configparser``)::

    [bench]
    scenarios = random_spikes, coherent_spikes
    snr = 1, 2, 4, 8, 16        ; "inf" gives noiseless debug runs
    trials = 20                 ; default 100 (1-D) / 40 (2-D)
    seed = 2024
    n = 100                     ; default 100 (1-D) / 40 (2-D grid side)
    workers = 1
    timeout = 60                ; seconds per solver call
    record_runtime = false      ; write wall-clock times into results.csv

    [scenario:coherent_spikes]  ; optional per-scenario overrides
    spikes = 4

    [method:penalized]
    kind = penalized            ; penalized | constrained | lasso
    lambda_rule = experiment

    [method:lasso_L4]
    kind = lasso
    oversample = 4

Without ``[method:*]`` sections the plan compares blockwise penalized
recovery with grid Lasso at ``L = 4``.

Outputs
-------
``results.csv``   one row per (scenario, method, snr, trial)
``summary.csv``   mean, standard error and failure counts per cell
``timings.csv``   wall-clock time per row (always written, never reproducible)
``failures.csv``  trials whose method raised
``plan.json``     the resolved plan
``<scenario>.svg`` mean error against 1/SNR with one-standard-error bars
"""

from __future__ import annotations

import configparser
import csv
import json
import math
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .baseline import lasso_denoise
from .recovery import RecoveryConfig, recover
from .signals import SCENARIOS, NoiseModel, ScenarioSpec, generate, observe
from .solver import SolverOptions
from .spectrum import Filter, Signal, convolve

RESULTS_HEADER = ["scenario", "method", "snr", "trial", "error", "runtime_ms", "converged"]
SUMMARY_HEADER = [
    "scenario", "method", "snr", "trials", "mean_error", "stderr",
    "failed", "not_converged", "mean_runtime_ms",
]

_RECOVERY_KEYS = {
    "m": "ints", "n": "ints", "block_size": "ints", "rho_bar": float, "lam": float,
    "lambda_rule": str, "alpha": float, "lambda_n": int, "interpolating": "bool",
    "shift_boundary": "bool", "halves": "bool",
}
_SOLVER_KEYS = {"max_iters": int, "tol_rel_obj": float, "tol_gap": float}


@dataclass
class MethodSpec:
    """A named estimator with its settings.

    ``kind`` is ``penalized`` or ``constrained`` (filter recovery, settings
    are :class:`RecoveryConfig` fields) or ``lasso`` (setting ``oversample``).
    ``max_iters``, ``tol_rel_obj`` and ``tol_gap`` go to the solver.
    """

    name: str
    kind: str
    params: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("penalized", "constrained", "lasso"):
            raise ValueError(f"method {self.name!r}: unknown kind {self.kind!r}")
        allowed = set(_SOLVER_KEYS) | ({"oversample"} if self.kind == "lasso" else set(_RECOVERY_KEYS))
        extra = set(self.params) - allowed
        if extra:
            raise ValueError(f"method {self.name!r}: unknown settings {sorted(extra)}")
        if self.kind == "constrained" and "rho_bar" not in self.params:
            raise ValueError(f"method {self.name!r}: constrained recovery needs rho_bar")

    def solver_options(self, timeout: Optional[float]) -> SolverOptions:
        kw = {k: v for k, v in self.params.items() if k in _SOLVER_KEYS}
        return SolverOptions(time_limit=timeout, **kw)

    def __call__(self, y: Signal, sigma: float, timeout: Optional[float] = None):
        """Return ``(x_hat, converged)``."""
        opts = self.solver_options(timeout)
        if self.kind == "lasso":
            res = lasso_denoise(y, sigma, int(self.params.get("oversample", 4)), opts=opts)
            return res.x_hat, res.converged
        kw = {k: v for k, v in self.params.items() if k in _RECOVERY_KEYS}
        cfg = RecoveryConfig(mode=self.kind, sigma=sigma, solver=opts, **kw)
        rep = recover(y, cfg)
        return rep.x_hat, rep.converged


def default_methods() -> List[MethodSpec]:
    return [
        MethodSpec("penalized", "penalized", {"lambda_rule": "experiment"}),
        MethodSpec("lasso_L4", "lasso", {"oversample": 4}),
    ]


@dataclass
class BenchPlan:
    scenarios: List[ScenarioSpec]
    snrs: Sequence[float] = (1, 2, 4, 8, 16)
    trials: Optional[int] = None
    methods: List[MethodSpec] = field(default_factory=default_methods)
    seed: int = 0
    workers: int = 1
    timeout: Optional[float] = 60.0
    record_runtime: bool = False
    noise: str = "complex"

    def __post_init__(self):
        if not self.scenarios:
            raise ValueError("plan has no scenarios")
        if self.trials is not None and self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.snrs or any(s <= 0 for s in self.snrs):
            raise ValueError("SNR levels must be positive")
        names = [m.name for m in self.methods]
        if not names or len(set(names)) != len(names):
            raise ValueError("method names must be non-empty and unique")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        NoiseModel(0.0, self.noise)

    def trials_for(self, spec: ScenarioSpec) -> int:
        if self.trials is not None:
            return self.trials
        return 40 if spec.is_2d else 100

    def snapshot(self) -> dict:
        return {
            "scenarios": [asdict(s) for s in self.scenarios],
            "snrs": [_fmt_snr(s) for s in self.snrs],
            "trials": self.trials,
            "methods": [asdict(m) for m in self.methods],
            "seed": self.seed,
            "workers": self.workers,
            "timeout": self.timeout,
            "record_runtime": self.record_runtime,
            "noise": self.noise,
        }


@dataclass
class TrialRecord:
    scenario: str
    method: str
    snr: float
    trial: int
    error: float
    runtime_ms: float
    converged: bool
    failure: Optional[str] = None


@dataclass
class CellSummary:
    scenario: str
    method: str
    snr: float
    trials: int
    mean_error: float
    stderr: float
    failed: int
    not_converged: int
    mean_runtime_ms: float
    errors: np.ndarray = field(repr=False, default=None)


@dataclass
class BenchResult:
    records: List[TrialRecord]
    summary: List[CellSummary]
    config: dict

    def cell(self, scenario: str, method: str, snr: float) -> CellSummary:
        for c in self.summary:
            if c.scenario == scenario and c.method == method and c.snr == snr:
                return c
        raise KeyError((scenario, method, snr))

    @property
    def failures(self) -> List[TrialRecord]:
        return [r for r in self.records if r.failure is not None]


def trial_seeds(master: int, scenario_index: int, trial: int):
    """``(signal_seed, noise_seed)`` for one trial, independent of scheduling."""
    ss = np.random.SeedSequence(master, spawn_key=(scenario_index, trial))
    sig, noise = ss.spawn(2)
    return int(sig.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1)), noise


def _run_trial(plan: BenchPlan, k: int, trial: int) -> List[TrialRecord]:
    spec = plan.scenarios[k]
    sig_seed, noise_seed = trial_seeds(plan.seed, k, trial)
    x = generate(spec.with_seed(sig_seed))
    out = []
    for snr in plan.snrs:
        y, sigma = observe(x, snr, noise_seed, NoiseModel(0.0, plan.noise))
        for method in plan.methods:
            t0 = time.perf_counter()
            try:
                x_hat, ok = method(y, sigma, plan.timeout)
                err = float(np.linalg.norm(x_hat.values - x.values))
                failure = None
            except Exception as exc:  # recorded per trial, never dropped
                err, ok = math.nan, False
                failure = "".join(traceback.format_exception_only(type(exc), exc)).strip()
            ms = 1e3 * (time.perf_counter() - t0)
            out.append(TrialRecord(spec.name, method.name, snr, trial, err, ms, bool(ok), failure))
    return out


def _run_chunk(args):
    plan, jobs = args
    return [r for k, t in jobs for r in _run_trial(plan, k, t)]


def summarize(records: Sequence[TrialRecord]) -> List[CellSummary]:
    cells: Dict[tuple, List[TrialRecord]] = {}
    for r in records:
        cells.setdefault((r.scenario, r.method, r.snr), []).append(r)
    out = []
    for (scen, meth, snr), rows in cells.items():
        rows = sorted(rows, key=lambda r: r.trial)
        ok = np.array([r.error for r in rows if r.failure is None])
        mean = float(np.mean(ok)) if ok.size else math.nan
        se = float(np.std(ok, ddof=1) / np.sqrt(ok.size)) if ok.size > 1 else math.nan
        out.append(
            CellSummary(
                scen, meth, snr, len(rows), mean, se,
                sum(r.failure is not None for r in rows),
                sum(not r.converged for r in rows),
                float(np.mean([r.runtime_ms for r in rows])),
                ok,
            )
        )
    return out


def run(plan: BenchPlan) -> BenchResult:
    """Run every (scenario, trial) and aggregate; results do not depend on ``workers``."""
    jobs = [(k, t) for k, spec in enumerate(plan.scenarios) for t in range(plan.trials_for(spec))]
    if plan.workers > 1 and len(jobs) > 1:
        chunks = [jobs[i :: plan.workers] for i in range(plan.workers)]
        with ProcessPoolExecutor(plan.workers) as pool:
            parts = list(pool.map(_run_chunk, [(plan, c) for c in chunks if c]))
        records = [r for part in parts for r in part]
    else:
        records = _run_chunk((plan, jobs))
    order = {s.name: i for i, s in enumerate(plan.scenarios)}
    morder = {m.name: i for i, m in enumerate(plan.methods)}
    sorder = {s: i for i, s in enumerate(plan.snrs)}
    records.sort(key=lambda r: (order[r.scenario], morder[r.method], sorder[r.snr], r.trial))
    return BenchResult(records, summarize(records), plan.snapshot())


def _fmt_snr(s: float) -> str:
    return "inf" if math.isinf(s) else repr(float(s))


def _fmt(v: float) -> str:
    return "" if v is None or math.isnan(v) else repr(float(v))


def write_outputs(result: BenchResult, out_dir, plot: bool = True) -> Dict[str, Path]:
    """Write the CSV files, the plan snapshot and (optionally) one SVG per scenario."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    record_runtime = bool(result.config.get("record_runtime"))
    paths = {}

    paths["results"] = out / "results.csv"
    with open(paths["results"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RESULTS_HEADER)
        for r in result.records:
            w.writerow([
                r.scenario, r.method, _fmt_snr(r.snr), r.trial, _fmt(r.error),
                _fmt(r.runtime_ms) if record_runtime else "", "true" if r.converged else "false",
            ])

    paths["timings"] = out / "timings.csv"
    with open(paths["timings"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["scenario", "method", "snr", "trial", "runtime_ms"])
        for r in result.records:
            w.writerow([r.scenario, r.method, _fmt_snr(r.snr), r.trial, f"{r.runtime_ms:.3f}"])

    paths["summary"] = out / "summary.csv"
    with open(paths["summary"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SUMMARY_HEADER)
        for c in result.summary:
            w.writerow([
                c.scenario, c.method, _fmt_snr(c.snr), c.trials, _fmt(c.mean_error), _fmt(c.stderr),
                c.failed, c.not_converged, f"{c.mean_runtime_ms:.3f}" if record_runtime else "",
            ])

    paths["failures"] = out / "failures.csv"
    with open(paths["failures"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["scenario", "method", "snr", "trial", "failure"])
        for r in result.failures:
            w.writerow([r.scenario, r.method, _fmt_snr(r.snr), r.trial, r.failure])

    paths["plan"] = out / "plan.json"
    paths["plan"].write_text(json.dumps(result.config, indent=2, sort_keys=True) + "\n")

    if plot:
        from .plotting import plot_scenario

        for name in dict.fromkeys(c.scenario for c in result.summary):
            cells = [c for c in result.summary if c.scenario == name]
            paths[f"plot:{name}"] = plot_scenario(cells, out / f"{name}.svg", title=name)
    return paths


def read_results(path) -> List[TrialRecord]:
    """Parse a ``results.csv`` back into records (failure text is not stored there)."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RESULTS_HEADER:
            raise ValueError(f"unexpected header {reader.fieldnames}")
        return [
            TrialRecord(
                r["scenario"], r["method"], float(r["snr"]), int(r["trial"]),
                float(r["error"]) if r["error"] else math.nan,
                float(r["runtime_ms"]) if r["runtime_ms"] else math.nan,
                r["converged"] == "true",
                None if r["error"] else "failed",
            )
            for r in reader
        ]


# plan files

def _parse_value(raw: str, kind):
    raw = raw.strip()
    if kind == "bool":
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if kind == "ints":
        parts = [int(p) for p in raw.split(",")]
        return parts[0] if len(parts) == 1 else tuple(parts)
    return kind(raw)


def _floats(raw: str) -> List[float]:
    return [math.inf if p.strip().lower() == "inf" else float(p) for p in raw.split(",") if p.strip()]


def parse_plan(text: str) -> BenchPlan:
    """Build a :class:`BenchPlan` from INI text (see the module docstring)."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.read_string(text)
    if not cp.has_section("bench"):
        raise ValueError("plan file needs a [bench] section")
    b = cp["bench"]
    known = {"scenarios", "snr", "trials", "seed", "n", "workers", "timeout", "record_runtime", "noise", "spikes"}
    extra = set(b) - known
    if extra:
        raise ValueError(f"unknown [bench] keys: {sorted(extra)}")
    names = [s.strip() for s in b.get("scenarios", "").split(",") if s.strip()]
    if not names:
        raise ValueError("[bench] scenarios is empty")

    scen_kinds = {"n": int, "spikes": int, "separation": float, "beta": float, "real": "bool", "terms": int}
    scenarios = []
    for name in names:
        if name not in SCENARIOS:
            raise ValueError(f"unknown scenario {name!r}")
        spec = ScenarioSpec(name)
        spec = replace(spec, n=40 if spec.is_2d else 100)
        kw = {}
        for key in ("n", "spikes"):
            if key in b:
                kw[key] = int(b[key])
        sec = f"scenario:{name}"
        if cp.has_section(sec):
            for key, raw in cp[sec].items():
                if key not in scen_kinds:
                    raise ValueError(f"[{sec}]: unknown key {key!r}")
                kw[key] = _parse_value(raw, scen_kinds[key])
        scenarios.append(replace(spec, **kw))

    methods = []
    for sec in cp.sections():
        if not sec.startswith("method:"):
            continue
        name = sec.split(":", 1)[1].strip()
        items = dict(cp[sec])
        kind = items.pop("kind", None)
        if kind is None:
            raise ValueError(f"[{sec}] needs a kind")
        table = {**_RECOVERY_KEYS, **_SOLVER_KEYS, "oversample": int}
        params = {}
        for key, raw in items.items():
            if key not in table:
                raise ValueError(f"[{sec}]: unknown key {key!r}")
            params[key] = _parse_value(raw, table[key])
        methods.append(MethodSpec(name, kind, params))

    timeout = b.get("timeout", "60").strip().lower()
    return BenchPlan(
        scenarios=scenarios,
        snrs=_floats(b.get("snr", "1, 2, 4, 8, 16")),
        trials=int(b["trials"]) if "trials" in b else None,
        methods=methods or default_methods(),
        seed=int(b.get("seed", "0")),
        workers=int(b.get("workers", "1")),
        timeout=None if timeout in ("none", "0", "") else float(timeout),
        record_runtime=_parse_value(b.get("record_runtime", "false"), "bool"),
        noise=b.get("noise", "complex").strip(),
    )


def load_plan(path) -> BenchPlan:
    return parse_plan(Path(path).read_text())


# stochastic bound check

@dataclass
class StochasticBoundReport:
    trials: int
    percentile_90: float
    bias: float
    envelope: float
    rho: float
    sigma: float
    c: float
    violated: bool


def validate_stochastic_bounds(
    x: Signal,
    phi: Filter,
    sigma: float,
    trials: int = 200,
    rho: Optional[float] = None,
    window=None,
    alpha: float = 0.1,
    c: float = 20.0,
    seed: int = 0,
    noise: str = "complex",
) -> StochasticBoundReport:
    """Monte-Carlo check of ``||x - phi * y||`` against ``bias + c sigma rho^2 sqrt(1 + ln(1/alpha))``.

    ``x`` must cover every sample ``phi * y`` touches on ``window`` (default:
    the largest window where the convolution is defined). ``bias`` is the
    noiseless error ``||x - phi * x||``. ``rho`` defaults to the smallest value
    with ``||phi||_2 <= rho / sqrt(len(phi))``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if window is None:
        window = tuple(
            (xlo + shi, xhi + slo) for (xlo, xhi), (slo, shi) in zip(x.window, phi.support)
        )
    if rho is None:
        rho = float(np.sqrt(phi.values.size) * np.linalg.norm(phi.values))
    target = x.restrict(window)
    bias = float(np.linalg.norm(target - convolve(phi, x, window).values))
    rng = np.random.default_rng(seed)
    model = NoiseModel(sigma, noise)
    errs = np.empty(trials)
    for i in range(trials):
        y = Signal(x.values + model.draw(x.shape, rng), x.window)
        errs[i] = np.linalg.norm(target - convolve(phi, y, window).values)
    p90 = float(np.percentile(errs, 90))
    envelope = bias + c * sigma * rho**2 * np.sqrt(1.0 + np.log(1.0 / alpha))
    return StochasticBoundReport(trials, p90, bias, float(envelope), rho, sigma, c, p90 > envelope * (1 + 1e-12))
