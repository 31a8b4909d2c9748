"""Config-driven experiments: validation, dispatch, sweeps, artifact emission and
re-verification of emitted bundles."""

from __future__ import annotations

import csv
import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from pathlib import Path

import numpy as np

from .binary_action import RelativePayoffDist, solve_binary_action
from .binary_trust import RESIDUAL_TOL, TrustInterval, psi_residuals, solve_trust_interval
from .core import BeliefDensity, UtilityCurve
from .errors import InputError, SolverError
from .game import FiniteGame, SaddleSolution, adviser_value, guaranteed_payoff, \
    best_response_value, payoff, solve_saddle, verify_trs_structure
from .mva import MvaSolution, SignalMatrix, construct_target_mva, solve_mva
from .spherical import SphericalInstance, balance_residual, solve_radius
from .transport import TransportMap, build_tre_map, verify_posterior_consistency

log = logging.getLogger("trustregion")

SCHEMA_VERSION = "1"
TASKS = ("binary-trust", "binary-action", "mva", "spherical", "oracle", "sweep", "verify-tre")
SWEEP_TARGETS = ("binary-trust", "binary-action", "spherical")
CSV_COLUMNS = {
    "binary-trust": ("alpha", "lo", "hi", "cutoff"),
    "binary-action": ("alpha", "alpha_hat", "regime", "sigma_low", "sigma_high", "value"),
    "spherical": ("alpha", "r_star", "residual"),
    "mva": ("alpha_star", "rank", "n_states", "n_signals"),
    "mva-audit": ("index", "n_states", "n_signals", "rank", "alpha_star", "within_bounds"),
    "oracle": ("alpha", "value", "u0", "v", "exploit_agent", "exploit_adversary"),
}
ARTIFACTS = {"binary-trust": "binary_trust.json", "binary-action": "binary_action.json",
             "mva": "mva.json", "spherical": "spherical.json", "oracle": "oracle.json",
             "transport": "transport_map.json"}
EXIT_OK, EXIT_FAILED, EXIT_INVALID, EXIT_SOLVER = 0, 1, 2, 3
DEVIATION_TOL = 1e-6
VERIFY_CELLS = 200


class ConfigError(InputError):
    """Schema violation; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


# ---------------------------------------------------------------------------
# parsing helpers

def _number(value, path: str) -> float:
    if isinstance(value, bool):
        raise ConfigError(path, "expected a number")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(Decimal(value.strip()))
        except InvalidOperation:
            pass
    raise ConfigError(path, f"expected a number or decimal string, got {value!r}")


def _alpha(value, path: str) -> float:
    a = _number(value, path)
    if not 0.0 <= a <= 1.0:
        raise ConfigError(path, f"alpha {a} is outside [0, 1]")
    return a


def _decimal(value, path: str) -> Decimal:
    try:
        return Decimal(str(value).strip())
    except InvalidOperation:
        raise ConfigError(path, f"expected a decimal number, got {value!r}") from None


def parse_alphas(params: dict, path: str = "config") -> list[float]:
    """``alpha`` (single), ``alphas`` (list) or ``alphas: {start, stop, step}``.

    Ranges are stepped in exact decimal arithmetic and include ``stop``.
    """
    if "alphas" in params:
        spec = params["alphas"]
        if isinstance(spec, dict):
            try:
                start, stop, step = (_decimal(spec[k], f"{path}.alphas.{k}")
                                     for k in ("start", "stop", "step"))
            except KeyError as exc:
                raise ConfigError(f"{path}.alphas", f"missing {exc.args[0]!r}") from None
            if step <= 0:
                raise ConfigError(f"{path}.alphas.step", "step must be positive")
            values, x = [], start
            while x <= stop:
                values.append(x)
                x += step
            out = [float(v) for v in values]
        elif isinstance(spec, list) and spec:
            out = [_number(v, f"{path}.alphas[{i}]") for i, v in enumerate(spec)]
        else:
            raise ConfigError(f"{path}.alphas", "expected a non-empty list or a range object")
        for i, a in enumerate(out):
            _alpha(a, f"{path}.alphas[{i}]")
        return out
    if "alpha" in params:
        return [_alpha(params["alpha"], f"{path}.alpha")]
    raise ConfigError(path, "missing 'alpha' or 'alphas'")


_UTILITY_ALIASES = {"quadratic": {"kind": "quadratic-loss"},
                    "quadratic-loss": {"kind": "quadratic-loss"},
                    "log-score": {"kind": "log-score"}, "entropy": {"kind": "log-score"}}


def parse_utility(spec, path: str = "config.utility") -> UtilityCurve:
    if isinstance(spec, str):
        if spec not in _UTILITY_ALIASES:
            raise ConfigError(path, f"unknown utility {spec!r}")
        spec = _UTILITY_ALIASES[spec]
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError(path, "expected a utility name or an object with 'kind'")
    spec = dict(spec)
    if spec["kind"] == "quadratic":
        spec["kind"] = "quadratic-loss"
    params = {k: (v if isinstance(v, list) else _number(v, f"{path}.params.{k}"))
              for k, v in spec.get("params", {}).items()}
    try:
        return UtilityCurve.from_dict({"kind": spec["kind"], "params": params})
    except InputError as exc:
        raise ConfigError(path, str(exc)) from None


def parse_density(spec, path: str = "config.tau") -> BeliefDensity:
    if spec == "uniform":
        return BeliefDensity.uniform()
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError(path, "expected 'uniform' or an object with 'kind'")
    try:
        return BeliefDensity.from_dict(spec)
    except (InputError, KeyError) as exc:
        raise ConfigError(path, str(exc)) from None


def _resolve(base: Path, value, path: str) -> Path:
    if not isinstance(value, str):
        raise ConfigError(path, "expected a file path")
    p = Path(value)
    p = p if p.is_absolute() else base / p
    if not p.is_file():
        raise ConfigError(path, f"file not found: {p}")
    return p


def _read_numeric_csv(p: Path, path: str) -> np.ndarray:
    rows = []
    with p.open(newline="", encoding="utf-8") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                rows.append([float(Decimal(c.strip())) for c in row])
            except InvalidOperation:
                if i == 0 and not rows:
                    continue  # header
                raise ConfigError(path, f"{p}: non-numeric entry on line {i + 1}") from None
    if not rows or len({len(r) for r in rows}) != 1:
        raise ConfigError(path, f"{p}: expected a non-empty rectangular numeric table")
    return np.array(rows)


def load_matrix_csv(p) -> SignalMatrix:
    return SignalMatrix(_read_numeric_csv(Path(p), "matrix_csv"))


def load_distribution_csv(p) -> RelativePayoffDist:
    table = _read_numeric_csv(Path(p), "distribution.csv")
    if table.shape[1] != 2:
        raise ConfigError("distribution.csv", "expected two columns (v, prob)")
    return RelativePayoffDist.from_atoms(table[:, 0], table[:, 1])


def parse_distribution(spec, base: Path, path="config.distribution") -> RelativePayoffDist:
    if not isinstance(spec, dict):
        raise ConfigError(path, "expected an object")
    try:
        if "csv" in spec:
            return load_distribution_csv(_resolve(base, spec["csv"], f"{path}.csv"))
        if "atoms" in spec:
            atoms = spec["atoms"]
            v = [_number(a[0], f"{path}.atoms[{i}][0]") for i, a in enumerate(atoms)]
            p = [_number(a[1], f"{path}.atoms[{i}][1]") for i, a in enumerate(atoms)]
            return RelativePayoffDist.from_atoms(v, p)
        return RelativePayoffDist.from_dict(spec)
    except ConfigError:
        raise
    except (InputError, KeyError, TypeError, IndexError) as exc:
        raise ConfigError(path, str(exc)) from None


def parse_spherical(spec, path="config.instance") -> SphericalInstance:
    if not isinstance(spec, dict):
        raise ConfigError(path, "expected an object")
    try:
        r0 = _number(spec["r0"], f"{path}.r0")
        center = [_number(c, f"{path}.center[{i}]") for i, c in enumerate(spec["center"])]
        dens = spec.get("radial_density", "uniform")
        tau = BeliefDensity.uniform_radial(r0) if dens == "uniform" \
            else BeliefDensity.from_dict(dens)
        return SphericalInstance(np.array(center), r0, tau)
    except ConfigError:
        raise
    except (InputError, KeyError, TypeError) as exc:
        raise ConfigError(path, str(exc)) from None


# ---------------------------------------------------------------------------
# configuration

@dataclass
class ExperimentConfig:
    task: str
    params: dict
    base_dir: Path = Path(".")
    output_dir: Path | None = None
    seed: int = 0
    tolerance: float | None = None
    jobs: int = 1

    @classmethod
    def from_dict(cls, d: dict, base_dir=".") -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("config", "expected a JSON object")
        task = d.get("task")
        if task not in TASKS:
            raise ConfigError("config.task", f"unknown task {task!r}; expected one of {TASKS}")
        out = d.get("output", {})
        if not isinstance(out, dict):
            raise ConfigError("config.output", "expected an object")
        seed = d.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, int):
            raise ConfigError("config.seed", "expected an integer")
        tol = d.get("tolerance")
        cfg = cls(task, {k: v for k, v in d.items()
                         if k not in ("task", "output", "seed", "tolerance")},
                  Path(base_dir), Path(out["dir"]) if "dir" in out else None, seed,
                  None if tol is None else _number(tol, "config.tolerance"))
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        p = Path(path)
        if not p.is_file():
            raise ConfigError("--config", f"file not found: {p}")
        try:
            d = json.loads(p.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError("--config", f"invalid JSON: {exc}") from None
        return cls.from_dict(d, p.parent)

    def validate(self):
        """Parse every task-specific field once so errors surface before any work."""
        p, task = self.params, self.task
        if task == "sweep":
            target = p.get("target")
            if target not in SWEEP_TARGETS:
                raise ConfigError("config.target", f"sweep target must be one of {SWEEP_TARGETS}")
            if "alphas" not in p:
                raise ConfigError("config.alphas", "sweeps need an 'alphas' list or range")
            task = target
        if task in ("binary-trust", "binary-action", "spherical"):
            parse_alphas(p)
        if task == "binary-trust":
            parse_utility(p.get("utility", "quadratic"))
            parse_density(p.get("tau", "uniform"))
        elif task == "binary-action":
            parse_distribution(p.get("distribution"), self.base_dir)
        elif task == "spherical":
            parse_spherical(p.get("instance"))
        elif task == "mva":
            self.signal_matrix()
        elif task == "oracle":
            self.game()
            if "alpha" in p or "alphas" in p:
                parse_alphas(p)

    def signal_matrix(self) -> SignalMatrix:
        p = self.params
        try:
            if "matrix_csv" in p:
                return load_matrix_csv(_resolve(self.base_dir, p["matrix_csv"], "config.matrix_csv"))
            if "matrix" in p:
                return SignalMatrix(np.array(
                    [[_number(x, f"config.matrix[{i}][{j}]") for j, x in enumerate(row)]
                     for i, row in enumerate(p["matrix"])]))
            if "construct" in p:
                c = p["construct"]
                return construct_target_mva(int(_number(c["n_states"], "config.construct.n_states")),
                                            int(_number(c["k_signals"], "config.construct.k_signals")),
                                            _number(c["delta"], "config.construct.delta"))
        except ConfigError:
            raise
        except (InputError, KeyError, TypeError) as exc:
            raise ConfigError("config.matrix", str(exc)) from None
        raise ConfigError("config", "mva needs 'matrix_csv', 'matrix' or 'construct'")

    def game(self) -> FiniteGame:
        p = self.params
        if "game" not in p:
            raise ConfigError("config.game", "oracle needs a 'game' JSON path or object")
        try:
            if isinstance(p["game"], dict):
                return FiniteGame.from_dict(p["game"])
            return FiniteGame.load(_resolve(self.base_dir, p["game"], "config.game"))
        except ConfigError:
            raise
        except InputError as exc:
            raise ConfigError("config.game", str(exc)) from None
        except json.JSONDecodeError as exc:
            raise ConfigError("config.game", f"invalid JSON: {exc}") from None


# ---------------------------------------------------------------------------
# artifact writers

def format_cell(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.6g" % float(x)


def csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([format_cell(x) for x in r])
    return buf.getvalue()


def write_csv(path: Path, columns, rows) -> Path:
    path.write_bytes(csv_text(columns, rows).encode("utf-8"))
    return path


def write_json(path: Path, payload: dict) -> Path:
    doc = {"schema_version": SCHEMA_VERSION, **payload}
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return path


def read_json(path: Path) -> dict:
    doc = json.loads(path.read_text(encoding="utf-8"))
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise InputError(f"{path}: unsupported schema_version {doc.get('schema_version')!r}")
    return doc


# ---------------------------------------------------------------------------
# per-point workers (top level so they pickle for process pools)

def _trust_point(u_dict, tau_dict, alpha, tol):
    u, tau = UtilityCurve.from_dict(u_dict), BeliefDensity.from_dict(tau_dict)
    return solve_trust_interval(u, tau, alpha, residual_tol=tol).to_dict()


def _action_point(dist_dict, alpha):
    return solve_binary_action(RelativePayoffDist.from_dict(dist_dict), alpha).to_dict()


def _sphere_point(inst_dict, alpha):
    inst = SphericalInstance.from_dict(inst_dict)
    r = solve_radius(inst, alpha)
    res = 0.0 if alpha <= 0.5 or alpha == 1.0 else balance_residual(inst, alpha, r)
    return {"alpha": alpha, "r_star": r, "residual": res}


def _map_points(fn, args_list, jobs):
    if jobs > 1 and len(args_list) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, *zip(*args_list)))
    return [fn(*a) for a in args_list]


# ---------------------------------------------------------------------------
# orchestration

@dataclass
class RunResult:
    status: int
    artifacts: list = field(default_factory=list)
    summaries: list = field(default_factory=list)
    message: str = ""


def _emit(summaries, line):
    summaries.append(line)
    print(line)


def _run_binary_trust(cfg, out, jobs, summaries, csv_name="binary_trust.csv"):
    p = cfg.params
    u = parse_utility(p.get("utility", "quadratic"))
    tau = parse_density(p.get("tau", "uniform"))
    alphas = parse_alphas(p)
    tol = RESIDUAL_TOL if cfg.tolerance is None else cfg.tolerance
    sols = [TrustInterval.from_dict(d) for d in _map_points(
        _trust_point, [(u.to_dict(), tau.to_dict(), a, tol) for a in alphas], jobs)]
    for s in sols:
        _emit(summaries, f"binary-trust alpha={s.alpha:.6g} lo={s.lo:.6g} hi={s.hi:.6g} "
                         f"cutoff={s.cutoff:.6g}")
    arts = [write_csv(out / csv_name, CSV_COLUMNS["binary-trust"],
                      [(s.alpha, s.lo, s.hi, s.cutoff) for s in sols])]
    if cfg.task == "binary-trust":
        arts.append(write_json(out / ARTIFACTS["binary-trust"], {
            "task": "binary-trust", "utility": u.to_dict(), "tau": tau.to_dict(),
            "solutions": [s.to_dict() for s in sols]}))
        maps = [build_tre_map(u, tau, s.alpha, s).to_dict() for s in sols]
        arts.append(write_json(out / ARTIFACTS["transport"], {"maps": maps}))
    return arts


def _run_binary_action(cfg, out, jobs, summaries, csv_name="binary_action.csv"):
    dist = parse_distribution(cfg.params.get("distribution"), cfg.base_dir)
    alphas = parse_alphas(cfg.params)
    sols = _map_points(_action_point, [(dist.to_dict(), a) for a in alphas], jobs)
    for s in sols:
        _emit(summaries, f"binary-action alpha={s['alpha']:.6g} alpha_hat={s['alpha_hat']:.6g} "
                         f"regime={s['regime']} value={s['value']:.6g}")
    cols = CSV_COLUMNS["binary-action"]
    arts = [write_csv(out / csv_name, cols, [tuple(s[c] for c in cols) for s in sols])]
    if cfg.task == "binary-action":
        arts.append(write_json(out / ARTIFACTS["binary-action"], {
            "task": "binary-action", "distribution": dist.to_dict(), "solutions": sols}))
    return arts


def _run_spherical(cfg, out, jobs, summaries, csv_name="spherical.csv"):
    inst = parse_spherical(cfg.params.get("instance"))
    alphas = parse_alphas(cfg.params)
    rows = _map_points(_sphere_point, [(inst.to_dict(), a) for a in alphas], jobs)
    for r in rows:
        _emit(summaries, f"spherical alpha={r['alpha']:.6g} r_star={r['r_star']:.6g} "
                         f"residual={r['residual']:.3g}")
    cols = CSV_COLUMNS["spherical"]
    arts = [write_csv(out / csv_name, cols, [tuple(r[c] for c in cols) for r in rows])]
    if cfg.task == "spherical":
        arts.append(write_json(out / ARTIFACTS["spherical"], {
            "task": "spherical", "instance": inst.to_dict(), "solutions": rows}))
    return arts


def _random_audit(spec, seed):
    rng = np.random.default_rng(seed)
    count = int(spec.get("count", 100))
    max_n, max_k = int(spec.get("max_states", 5)), int(spec.get("max_signals", 6))
    rows = []
    for i in range(count):
        n, k = int(rng.integers(2, max_n + 1)), int(rng.integers(2, max_k + 1))
        sol = solve_mva(rng.dirichlet(np.ones(k), size=n))
        ok = 1.0 / max(sol.rank, 2) - 1e-9 <= sol.alpha_star <= 0.5 + 1e-9
        rows.append((i, n, k, sol.rank, sol.alpha_star, ok))
    return rows


def _run_mva(cfg, out, jobs, summaries):
    pi = cfg.signal_matrix()
    sol = solve_mva(pi, merge_duplicates=bool(cfg.params.get("merge_duplicates", True)))
    _emit(summaries, f"mva alpha_star={sol.alpha_star:.9g} rank={sol.rank}")
    arts = [write_json(out / ARTIFACTS["mva"], {"task": "mva", "matrix": pi.to_dict(),
                                                "merge_duplicates": bool(cfg.params.get(
                                                    "merge_duplicates", True)),
                                                "solution": sol.to_dict()}),
            write_csv(out / "mva.csv", CSV_COLUMNS["mva"],
                      [(sol.alpha_star, sol.rank, pi.shape[0], pi.shape[1])])]
    if "random_audit" in cfg.params:
        rows = _random_audit(cfg.params["random_audit"], cfg.seed)
        bad = sum(not r[-1] for r in rows)
        _emit(summaries, f"mva audit matrices={len(rows)} outside_bounds={bad}")
        arts.append(write_csv(out / "mva_audit.csv", CSV_COLUMNS["mva-audit"], rows))
    return arts


def _run_oracle(cfg, out, jobs, summaries):
    game = cfg.game()
    alphas = parse_alphas(cfg.params) if ("alpha" in cfg.params or "alphas" in cfg.params) \
        else [game.alpha]
    tol = 1e-8 if cfg.tolerance is None else cfg.tolerance
    records, rows = [], []
    for a in alphas:
        g = game.with_alpha(a)
        sol = solve_saddle(g, tol=tol)
        u_star, u0, v = adviser_value(g, sol)
        _emit(summaries, f"oracle alpha={a:.6g} value={u_star:.9g} u0={u0:.9g} v={v:.3g} "
                         f"exploitability={max(sol.exploitability):.3g}")
        records.append({"alpha": a, "u_star": u_star, "u0": u0, "v": v,
                        "solution": sol.to_dict()})
        rows.append((a, u_star, u0, v, *sol.exploitability))
    return [write_json(out / ARTIFACTS["oracle"], {"task": "oracle", "game": game.to_dict(),
                                                   "results": records}),
            write_csv(out / "oracle.csv", CSV_COLUMNS["oracle"], rows)]


_RUNNERS = {"binary-trust": _run_binary_trust, "binary-action": _run_binary_action,
            "spherical": _run_spherical, "mva": _run_mva, "oracle": _run_oracle}


def run_experiment(cfg: ExperimentConfig, out=None, jobs: int | None = None) -> RunResult:
    """Dispatch ``cfg`` to its solver, write artifacts under ``out`` and return the
    exit status (0 ok, 1 failed verification, 2 invalid input, 3 solver failure)."""
    jobs = cfg.jobs if jobs is None else max(1, int(jobs))
    out_dir = Path(out) if out is not None else (cfg.output_dir or Path("trustregion-out"))
    summaries: list = []
    try:
        if cfg.task == "verify-tre":
            bundle = cfg.params.get("bundle")
            target = out_dir if bundle is None else (cfg.base_dir / bundle)
            report = verify_bundle(target, tolerance=cfg.tolerance)
            for line in report.lines():
                _emit(summaries, line)
            return RunResult(report.status, [], summaries)
        out_dir.mkdir(parents=True, exist_ok=True)
        if cfg.task == "sweep":
            target = cfg.params["target"]
            arts = _RUNNERS[target](cfg, out_dir, jobs, summaries,
                                    csv_name=f"sweep_{target.replace('-', '_')}.csv")
        else:
            arts = _RUNNERS[cfg.task](cfg, out_dir, jobs, summaries)
        return RunResult(EXIT_OK, arts, summaries)
    except SolverError as exc:
        log.error("solver error: %s", exc)
        return RunResult(EXIT_SOLVER, [], summaries, f"solver error: {exc}")
    except InputError as exc:
        log.error("validation error: %s", exc)
        return RunResult(EXIT_INVALID, [], summaries, f"validation error: {exc}")
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return RunResult(EXIT_INVALID, [], summaries, f"I/O error: {exc}")


# ---------------------------------------------------------------------------
# verification

@dataclass
class Check:
    name: str
    margin: float
    passed: bool


@dataclass
class VerifyReport:
    checks: list = field(default_factory=list)
    error: str = ""

    @property
    def status(self) -> int:
        if self.error:
            return EXIT_INVALID
        return EXIT_OK if all(c.passed for c in self.checks) else EXIT_FAILED

    def add(self, name, margin, passed):
        self.checks.append(Check(name, float(margin), bool(passed)))

    def lines(self) -> list[str]:
        if self.error:
            return [f"verify error: {self.error}"]
        return [f"{'PASS' if c.passed else 'FAIL'} {c.name} margin={c.margin:.3g}"
                for c in self.checks]


def _verify_binary_trust(doc, maps_doc, report, tol):
    u, tau = UtilityCurve.from_dict(doc["utility"]), BeliefDensity.from_dict(doc["tau"])
    res_tol = RESIDUAL_TOL if tol is None else tol
    for i, sd in enumerate(doc["solutions"]):
        s = TrustInterval.from_dict(sd)
        tag = f"binary-trust[alpha={s.alpha:.6g}]"
        ordered = 0.0 <= s.lo <= s.prior <= s.hi <= 1.0 and s.lo <= s.cutoff <= s.hi
        report.add(f"{tag} interval ordering", 0.0, ordered)
        if s.alpha > 0.5:
            psi = psi_residuals(u, tau, s.alpha, s.lo, s.hi)
            m = max(abs(psi[0]), abs(psi[1]))
            report.add(f"{tag} balancing residuals", m, m <= res_tol)
        tmap = build_tre_map(u, tau, s.alpha, s, strict=False)
        dev = verify_posterior_consistency(tmap, tau, s.alpha, s, VERIFY_CELLS).max_deviation
        report.add(f"{tag} posterior consistency (rebuilt map)", dev, dev <= DEVIATION_TOL)
        if maps_doc is not None and i < len(maps_doc["maps"]):
            stored = TransportMap.from_dict(maps_doc["maps"][i])
            dev = verify_posterior_consistency(stored, tau, s.alpha, s, VERIFY_CELLS).max_deviation
            report.add(f"{tag} posterior consistency (stored map)", dev, dev <= DEVIATION_TOL)


def _verify_mva(doc, report):
    pi = SignalMatrix.from_dict(doc["matrix"])
    sol = MvaSolution.from_dict(doc["solution"])
    fresh = solve_mva(pi, merge_duplicates=doc.get("merge_duplicates", True))
    g, a, d = sol.garbling, sol.alpha_star, sol.row_difference
    resid = max(np.max(np.abs(g.sum(axis=1) - 1)), np.max(np.abs(d @ g)) if d.size else 0.0,
                max(0.0, a - np.min(np.diag(g))), max(0.0, -np.min(g)))
    report.add("mva certificate constraints", resid, resid <= 1e-8)
    report.add("mva optimum reproduced", abs(fresh.alpha_star - a),
               abs(fresh.alpha_star - a) <= 1e-8)
    lo_bound = 1.0 / max(sol.rank, 2)
    if sol.rank >= 2:
        report.add("mva bounds", 0.0, lo_bound - 1e-9 <= a <= 0.5 + 1e-9)


def _verify_spherical(doc, report):
    inst = SphericalInstance.from_dict(doc["instance"])
    for r in doc["solutions"]:
        a, rs = r["alpha"], r["r_star"]
        if 0.5 < a < 1.0:
            res = abs(balance_residual(inst, a, rs))
            report.add(f"spherical[alpha={a:.6g}] balance residual", res, res <= 1e-10)
        else:
            want = 0.0 if a <= 0.5 else inst.r0
            report.add(f"spherical[alpha={a:.6g}] boundary radius", abs(rs - want), rs == want)


def _verify_binary_action(doc, report):
    dist = RelativePayoffDist.from_dict(doc["distribution"])
    for s in doc["solutions"]:
        fresh = solve_binary_action(dist, s["alpha"]).to_dict()
        gap = abs(fresh["value"] - s["value"])
        report.add(f"binary-action[alpha={s['alpha']:.6g}] value reproduced", gap,
                   gap <= 1e-12 and fresh["regime"] == s["regime"])


def _verify_oracle(doc, report, tol):
    game = FiniteGame.from_dict(doc["game"])
    for r in doc["results"]:
        g = game.with_alpha(r["alpha"])
        sol = SaddleSolution.from_dict(r["solution"])
        u = payoff(g, sol.agent_strategy, sol.adversary_strategy)
        ex = max(u - guaranteed_payoff(g, sol.agent_strategy),
                 best_response_value(g, sol.adversary_strategy) - u)
        report.add(f"oracle[alpha={r['alpha']:.6g}] exploitability", ex, ex <= 1e-8)
        st = verify_trs_structure(g, sol, tol=1e-7 if tol is None else tol)
        report.add(f"oracle[alpha={r['alpha']:.6g}] on-path best responses", st.worst_margin,
                   st.passed)


def verify_bundle(bundle, tolerance: float | None = None) -> VerifyReport:
    """Reload every artifact in ``bundle`` and re-run its certificate checks."""
    report = VerifyReport()
    bundle = Path(bundle)
    if not bundle.is_dir():
        report.error = f"bundle directory not found: {bundle}"
        return report
    found = {k: bundle / v for k, v in ARTIFACTS.items() if (bundle / v).is_file()}
    if not set(found) - {"transport"}:
        report.error = f"no solution artifacts in {bundle}"
        return report
    try:
        if "binary-trust" in found:
            maps = read_json(found["transport"]) if "transport" in found else None
            _verify_binary_trust(read_json(found["binary-trust"]), maps, report, tolerance)
        if "mva" in found:
            _verify_mva(read_json(found["mva"]), report)
        if "spherical" in found:
            _verify_spherical(read_json(found["spherical"]), report)
        if "binary-action" in found:
            _verify_binary_action(read_json(found["binary-action"]), report)
        if "oracle" in found:
            _verify_oracle(read_json(found["oracle"]), report, tolerance)
    except (InputError, KeyError, TypeError, json.JSONDecodeError) as exc:
        report.error = f"malformed artifact: {exc}"
    return report
