"""Command-line harness.

Every run writes a directory::

    <out>/manifest.json   config, code version, constants, thresholds, reports
    <out>/fields/*.csv    solution fields (r,u) with JSON sidecars
    <out>/tables/*.csv    summaries, histories and sweep tables
    <out>/logs/run.log

The manifest's ``config`` block is itself a valid ``--config`` file. Exit
status: 0 when everything converged, 2 when some part did not, 1 on a
configuration error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from . import __version__
from ._kernels import BACKEND
from .errors import FracKirchhoffError, ParameterError
from .fiber import h_roots, mu_thresholds
from .gn import GNCache, optimal_gn_constant
from .radial import RadialGrid, mass_norm_sq, moments, read_field, write_field
from .solvers import (
    MAX_ITER,
    STOP_TOL,
    asymptotic_sweep,
    default_ladder,
    solve_local_min,
    solve_mountain_pass,
    solve_mu_zero,
    write_sweep_csv,
)
from .variational import (
    TOL_EL,
    TOL_P,
    PohozaevClass,
    ProblemParams,
    Regime,
    SolveReport,
    classify_pohozaev,
    el_residual,
    l2_critical_exponent,
    multiplier_estimate,
    pohozaev_identity_residual,
    relative_pohozaev,
    _json_default,
)

MODES = ("thresholds", "local_min", "mountain_pass", "mu_zero", "sweep", "gn_constant", "verify")
EXIT_OK, EXIT_CONFIG, EXIT_PARTIAL = 0, 1, 2
IDENTITY_TOL = 1e-4
MASS_TOL = 1e-10

log = logging.getLogger("frackirchhoff")


class ConfigError(Exception):
    """Invalid run configuration; the message names the field and constraint."""


@dataclass
class RunConfig:
    """Flat run configuration; mirrors the JSON config file."""

    mode: str
    a: float = 1.0
    b: float = 1.0
    c: float = 1.0
    s: float = 0.9
    q: float = 3.0
    p: float = 4.7
    mu: float | None = None
    r_max: float = 20.0
    n: int = 4096
    mu_ladder: list | None = None
    ladder_rungs: int = 12
    ladder_factor: float = 0.5
    output_dir: str = "run"
    tol_el: float = TOL_EL
    tol_p: float = TOL_P
    stop_tol: float = STOP_TOL
    max_iter: int = MAX_ITER
    field: str | None = None
    gn_cache: str | None = None
    verbosity: int = 1

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if "config" in data and isinstance(data["config"], dict):
            data = data["config"]  # a manifest from an earlier run
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        if "mode" not in data:
            raise ConfigError("config must name a mode")
        return cls(**data)

    def params(self) -> ProblemParams:
        return ProblemParams(self.a, self.b, self.c, self.s, self.q, self.p, self.mu or 0.0)

    def grid(self) -> RadialGrid:
        return RadialGrid(float(self.r_max), int(self.n))


# -------------------------------------------------------------- validation


def validate(cfg: RunConfig) -> None:
    """Mode-specific checks run before any computation."""
    if cfg.mode not in MODES:
        raise ConfigError(f"mode must be one of {', '.join(MODES)}, got {cfg.mode!r}")
    try:
        params = cfg.params()
        cfg.grid()
    except (ParameterError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    if cfg.mu is not None and cfg.mu < 0:
        raise ConfigError(f"mu must be >= 0, got {cfg.mu}")
    regime = params.regime()
    crit = l2_critical_exponent(params.s)
    mixed_msg = (
        f"mixed regime requires 2<q<2+4s/3={2 + 4 * params.s / 3:.6g} and "
        f"2+8s/3={crit:.6g}<p<2_{{s}}^{{\\ast}}"
    )
    if cfg.mode in ("thresholds", "local_min") and regime is not Regime.MIXED:
        raise ConfigError(f"q, p: {mixed_msg}; got q={params.q}, p={params.p}")
    if cfg.mode == "local_min" and not (cfg.mu and cfg.mu > 0):
        raise ConfigError("mu: local_min needs 0 < mu < min(mu_1, mu_2)")
    if cfg.mode in ("mountain_pass", "sweep") and regime is Regime.UNSUPPORTED:
        raise ConfigError(
            f"q, p: needs the mixed regime ({mixed_msg}) or the L2-supercritical "
            f"regime 2+8s/3={crit:.6g}<q<p<2_{{s}}^{{\\ast}}; got q={params.q}, p={params.p}"
        )
    if cfg.mode == "mountain_pass" and not (cfg.mu and cfg.mu > 0):
        raise ConfigError("mu: mountain_pass needs mu > 0 (use mu_zero for mu = 0)")
    if cfg.mode in ("mu_zero", "sweep") and not params.p > crit:
        raise ConfigError(f"p must exceed 2+8s/3={crit:.6g}; got p={params.p}")
    if cfg.mode == "sweep":
        if cfg.mu_ladder is not None:
            lad = [float(x) for x in cfg.mu_ladder]
            if not lad or any(x <= 0 for x in lad) or any(b >= a for a, b in zip(lad, lad[1:])):
                raise ConfigError("mu_ladder must be a non-empty, positive, strictly decreasing list")
        elif regime is Regime.SUPERCRITICAL and not cfg.mu:
            raise ConfigError("mu: a supercritical sweep without mu_ladder needs mu as the first rung")
        if not (0 < cfg.ladder_factor < 1 and cfg.ladder_rungs >= 1):
            raise ConfigError("ladder_factor must lie in (0, 1) and ladder_rungs must be >= 1")
    if cfg.mode == "verify":
        if not cfg.field:
            raise ConfigError("field: verify needs the path of a stored solution field")
        if not Path(cfg.field).exists():
            raise ConfigError(f"field: {cfg.field} does not exist")
    for name in ("tol_el", "tol_p", "stop_tol"):
        if not getattr(cfg, name) > 0:
            raise ConfigError(f"{name} must be positive")


# ------------------------------------------------------------------- output


def _fmt(x) -> str:
    if isinstance(x, bool) or isinstance(x, str):
        return str(x)
    if isinstance(x, (int,)):
        return str(x)
    return f"{float(x):.17g}"


def _write_table(path: Path, header, rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for row in rows:
            wr.writerow([_fmt(v) for v in row])
    return path


REPORT_COLUMNS = [
    "name", "kind", "mu", "level", "lambda", "el_residual", "pohozaev_residual",
    "identity_residual", "classification", "converged", "iterations", "positive", "seminorm", "r_max",
]


def _report_row(name: str, rep: SolveReport):
    return [
        name, rep.kind, rep.params.mu, rep.level, rep.lam, rep.el_residual, rep.pohozaev_residual,
        rep.identity_residual, rep.classification.value, rep.converged, rep.iterations,
        rep.positive, rep.seminorm, rep.field.grid.r_max,
    ]


class Run:
    """Artifacts of a single run, written by one writer."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.out = Path(cfg.output_dir)
        self.manifest = {
            "config": asdict(cfg),
            "code_version": __version__,
            "kernel_backend": BACKEND,
            "gn_constants": {},
            "thresholds": {},
            "reports": {},
            "artifacts": [],
        }
        self.report_rows = []

    def rel(self, path: Path) -> str:
        return str(path.relative_to(self.out))

    def add_report(self, name: str, rep: SolveReport) -> None:
        fpath = write_field(rep.field, self.out / "fields" / f"{name}.csv", s=rep.params.s)
        hpath = _write_table(
            self.out / "tables" / f"{name}_history.csv",
            ["iteration", "level", "el_residual", "pohozaev_residual", "lambda"],
            rep.history,
        )
        summary = rep.summary()
        summary["field_csv"] = self.rel(fpath)
        self.manifest["reports"][name] = summary
        self.manifest["artifacts"] += [self.rel(fpath), self.rel(hpath)]
        self.report_rows.append(_report_row(name, rep))

    def finish(self, status: int) -> int:
        if self.report_rows:
            p = _write_table(self.out / "tables" / "reports.csv", REPORT_COLUMNS, self.report_rows)
            self.manifest["artifacts"].append(self.rel(p))
        self.manifest["exit_status"] = status
        self.manifest["artifacts"] = sorted(set(self.manifest["artifacts"]))
        (self.out / "manifest.json").write_text(
            json.dumps(self.manifest, indent=2, default=_json_default, sort_keys=False) + "\n"
        )
        return status


# ---------------------------------------------------------------- pipeline


def _constants(run: Run, params: ProblemParams, grid: RadialGrid, alphas: dict) -> dict:
    cache = GNCache(run.cfg.gn_cache) if run.cfg.gn_cache else None
    out = {}
    for name, alpha in alphas.items():
        hit = cache.get(params.s, alpha, grid) if cache else None
        if hit is not None:
            entry = {"s": params.s, "alpha": alpha, "value": float(hit), "converged": True,
                     "source": "cache", "r_max": grid.r_max, "n": grid.n}
        else:
            res = optimal_gn_constant(params.s, alpha, grid)
            entry = {"s": params.s, "alpha": alpha, "value": res.constant, "converged": res.converged,
                     "iterations": res.iterations, "source": "computed", "r_max": grid.r_max, "n": grid.n}
            if cache and res.converged:
                cache.put(params.s, alpha, grid, res.constant)
        log.info("C(s=%g, alpha=%g) = %.17g (%s)", params.s, alpha, entry["value"], entry["source"])
        out[name] = entry
    run.manifest["gn_constants"].update(out)
    return {k: v["value"] for k, v in out.items()}


def _thresholds(run: Run, params: ProblemParams, C_q: float, C_p: float) -> dict:
    mu1, mu2 = mu_thresholds(params, C_q, C_p)
    th = {"mu_1": mu1, "mu_2": mu2}
    if params.mu > 0 and params.mu < mu2:
        th["R0"], th["R1"] = h_roots(params, C_q, C_p)
    run.manifest["thresholds"].update(th)
    return th


def _iteration_logger(kind):
    def cb(it, level, res, relp):
        log.debug("%s it=%d level=%.17g el=%.3e P=%.3e", kind, it, level, res, relp)
    return cb


def _solve_kwargs(cfg: RunConfig, grid: RadialGrid, kind: str) -> dict:
    return dict(
        grid=grid, tol=cfg.stop_tol, tol_el=cfg.tol_el, tol_p=cfg.tol_p, max_iter=cfg.max_iter,
        raise_on_failure=False, callback=_iteration_logger(kind),
    )


def _verify_field(cfg: RunConfig) -> list[tuple[str, float, str, bool]]:
    params = cfg.params()
    u, meta = read_field(cfg.field)
    lam = multiplier_estimate(params, u)
    m = moments(u, params.s, params.q, params.p)
    res = el_residual(params, u, lam)
    relp = relative_pohozaev(params, m)
    ident = pohozaev_identity_residual(params, u, lam)
    mass_err = abs(mass_norm_sq(u) - params.c**2) / params.c**2
    cls = classify_pohozaev(params, m, cfg.tol_p)
    return [
        ("el_residual", res, f"<= {cfg.tol_el:g}", res <= cfg.tol_el),
        ("pohozaev_residual", relp, f"<= {cfg.tol_p:g}", relp <= cfg.tol_p),
        ("identity_residual", ident, f"<= {IDENTITY_TOL:g}", ident <= IDENTITY_TOL),
        ("mass_error", mass_err, f"<= {MASS_TOL:g}", mass_err <= MASS_TOL),
        ("lambda", lam, "< 0", lam < 0),
        ("min_value", float(u.values.min()), "> 0", bool(u.values.min() > 0)),
        ("on_manifold", 0.0 if cls is not PohozaevClass.NOT_ON_MANIFOLD else 1.0, cls.value,
         cls is not PohozaevClass.NOT_ON_MANIFOLD),
    ]


def run(cfg: RunConfig) -> int:
    """Execute one configured pipeline and write its artifacts."""
    try:
        validate(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = Path(cfg.output_dir)
    (out / "logs").mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(out / "logs" / "run.log", mode="w")
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    level = {0: logging.WARNING, 1: logging.INFO}.get(cfg.verbosity, logging.DEBUG)
    log.addHandler(handler)
    old_level = log.level
    log.setLevel(level)
    runobj = Run(cfg)
    try:
        status = _dispatch(cfg, runobj)
    except FracKirchhoffError as exc:
        log.error("run failed: %s", exc)
        print(f"error: {exc}", file=sys.stderr)
        runobj.manifest["error"] = str(exc)
        status = EXIT_PARTIAL
    finally:
        log.removeHandler(handler)
        handler.close()
        log.setLevel(old_level)
    return runobj.finish(status)


def _dispatch(cfg: RunConfig, run_: Run) -> int:
    params = cfg.params()
    grid = cfg.grid()
    mode = cfg.mode

    if mode == "gn_constant":
        C = _constants(run_, params, grid, {"C_q": params.q, "C_p": params.p})
        rows = [[k, v["s"], v["alpha"], v["value"], v["converged"]] for k, v in run_.manifest["gn_constants"].items()]
        p = _write_table(run_.out / "tables" / "gn_constants.csv", ["name", "s", "alpha", "constant", "converged"], rows)
        run_.manifest["artifacts"].append(run_.rel(p))
        print(f"C(s,q)={C['C_q']:.17g} C(s,p)={C['C_p']:.17g}")
        ok = all(v["converged"] for v in run_.manifest["gn_constants"].values())
        return EXIT_OK if ok else EXIT_PARTIAL

    if mode == "verify":
        checks = _verify_field(cfg)
        p = _write_table(run_.out / "tables" / "verify.csv", ["invariant", "value", "requirement", "pass"], checks)
        run_.manifest["artifacts"].append(run_.rel(p))
        run_.manifest["verify"] = {name: {"value": v, "requirement": req, "pass": ok} for name, v, req, ok in checks}
        for name, v, req, ok in checks:
            print(f"{'PASS' if ok else 'FAIL'} {name} = {v:.6g} ({req})")
        return EXIT_OK if all(c[3] for c in checks) else EXIT_PARTIAL

    regime = params.regime()
    C_q = C_p = None
    if regime is Regime.MIXED and mode != "mu_zero":
        C = _constants(run_, params, grid, {"C_q": params.q, "C_p": params.p})
        C_q, C_p = C["C_q"], C["C_p"]
        th = _thresholds(run_, params, C_q, C_p)
        if mode == "thresholds":
            rows = [[k, v] for k, v in th.items()] + [[k, v] for k, v in C.items()]
            p = _write_table(run_.out / "tables" / "thresholds.csv", ["quantity", "value"], rows)
            run_.manifest["artifacts"].append(run_.rel(p))
            for k, v in th.items():
                print(f"{k} = {v:.17g}")
            return EXIT_OK
        if mode in ("local_min", "mountain_pass") and not params.mu < min(th["mu_1"], th["mu_2"]):
            raise FracKirchhoffError(
                f"mu={params.mu:g} is not below min(mu_1, mu_2)={min(th['mu_1'], th['mu_2']):.6g}"
            )

    if mode == "local_min":
        rep = solve_local_min(params, C_q, C_p, **_solve_kwargs(cfg, grid, mode))
        run_.add_report("local_min", rep)
        return _status([rep])
    if mode == "mountain_pass":
        rep = solve_mountain_pass(params, C_q, C_p, **_solve_kwargs(cfg, grid, mode))
        run_.add_report("mountain_pass", rep)
        return _status([rep])
    if mode == "mu_zero":
        rep = solve_mu_zero(params, **_solve_kwargs(cfg, grid, mode))
        run_.add_report("mu_zero", rep)
        return _status([rep])
    if mode == "sweep":
        if cfg.mu_ladder is not None:
            ladder = [float(x) for x in cfg.mu_ladder]
        else:
            start = min(run_.manifest["thresholds"]["mu_1"], run_.manifest["thresholds"]["mu_2"]) / 4.0 \
                if regime is Regime.MIXED else float(cfg.mu)
            ladder = default_ladder(start, cfg.ladder_rungs, cfg.ladder_factor)
        run_.manifest["mu_ladder"] = ladder
        reports = {}
        kw = _solve_kwargs(cfg, grid, "mu_zero")
        u0 = solve_mu_zero(params, **kw)
        rows = asymptotic_sweep(
            params, ladder, C_q, C_p, grid=grid, u0=u0, tol=cfg.stop_tol, max_iter=cfg.max_iter,
            reports=reports,
        )
        for (kind, i), rep in sorted(reports.items(), key=lambda kv: (kv[0][1], kv[0][0])):
            run_.add_report("mu_zero" if kind == "mu_zero" else f"{kind}_{i:02d}", rep)
        p = write_sweep_csv(rows, run_.out / "tables" / "sweep.csv")
        run_.manifest["artifacts"].append(run_.rel(p))
        run_.manifest["sweep"] = [asdict(r) for r in rows]
        ok = u0.converged and all(r.status == "ok" for r in rows)
        return EXIT_OK if ok else EXIT_PARTIAL
    raise ConfigError(f"unhandled mode {mode}")  # pragma: no cover


def _status(reports) -> int:
    return EXIT_OK if all(r.converged for r in reports) else EXIT_PARTIAL


# ---------------------------------------------------------------------- CLI


def _parse_ladder(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"--mu-ladder expects comma-separated numbers, got {text!r}")


def _parse_grid(text: str) -> tuple[float, int]:
    try:
        r_max, n = text.split(",")
        return float(r_max), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--grid expects 'r_max,n', got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON run configuration (a manifest also works)")
    common.add_argument("--out", dest="output_dir", help="run directory")
    common.add_argument("--mu-ladder", dest="mu_ladder", type=_parse_ladder, help='"v1,v2,..." strictly decreasing')
    common.add_argument("--grid", type=_parse_grid, help='"r_max,n"')
    common.add_argument("--tol-el", dest="tol_el", type=float)
    common.add_argument("--tol-p", dest="tol_p", type=float)
    common.add_argument("--verbosity", type=int)
    common.add_argument("--field", help="stored solution field (verify mode)")
    common.add_argument("--gn-cache", dest="gn_cache", help="JSON cache of Gagliardo-Nirenberg constants")
    common.add_argument("--max-iter", dest="max_iter", type=int)
    common.add_argument("--ladder-rungs", dest="ladder_rungs", type=int)
    common.add_argument("--ladder-factor", dest="ladder_factor", type=float)
    for name in ("a", "b", "c", "s", "q", "p", "mu"):
        common.add_argument(f"--{name}", type=float)

    parser = argparse.ArgumentParser(prog="frackirchhoff", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        sub.add_parser(mode, parents=[common])
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    data = {}
    if args.config is not None:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"config: cannot read {args.config}: {exc}") from None
        if "config" in data and isinstance(data["config"], dict):
            data = dict(data["config"])
    data["mode"] = args.mode
    for key in ("output_dir", "mu_ladder", "tol_el", "tol_p", "verbosity", "field", "gn_cache",
                "max_iter", "ladder_rungs", "ladder_factor", "a", "b", "c", "s", "q", "p", "mu"):
        val = getattr(args, key)
        if val is not None:
            data[key] = val
    if args.grid is not None:
        data["r_max"], data["n"] = args.grid
    try:
        return RunConfig.from_dict(data)
    except TypeError as exc:
        raise ConfigError(f"config: {exc}") from None


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if cfg.verbosity >= 1:
        logging.basicConfig(level=logging.WARNING, format="%(message)s")
    status = run(cfg)
    if status != EXIT_CONFIG:
        print(f"wrote {Path(cfg.output_dir) / 'manifest.json'} (exit {status})")
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
