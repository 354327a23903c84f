"""Command-line front end.

Every subcommand is a thin adapter: parse arguments into a RunConfig,
call the library, format the result.  No numerical logic lives here.

Output conventions (a public contract):
  * JSON numbers carry 17 significant digits; NaN/inf serialize as null.
  * CSV column orders are frozen (see _BRANCH_COLUMNS, _CURVE_COLUMNS).
  * No wall times or timestamps in any file, so repeated runs with the
    same configuration are byte-identical.
Files go under the --out prefix; without --out, reports print to stdout.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys

import numpy as np

from . import acceptance, closedform
from ._log import get_logger
from .branch import (
    continue_branch,
    energy_entropy_along,
    second_solution,
    uniqueness_probe,
)
from .branch.multiplicity import concentration_fraction
from .geometry import (
    RESOLUTION_MAX,
    RESOLUTION_MIN,
    Disk,
    Ellipse,
    auto_resolution,
    build_grid,
    inscribed_ratio,
    john_ellipse,
    load_polygon,
)
from .solver import newton_P, newton_Q
from .solver.functionals import (
    F_lambda,
    delta_of,
    energy,
    entropy,
    lambda_of,
    mass_integral,
)
from .spectrum import spectrum_at

log = get_logger("mfe.cli")

_BRANCH_COLUMNS = ("alpha", "lambda", "mu", "sup_u", "energy", "entropy",
                   "F_lambda", "tau1", "nu0", "fold_flag")
_CURVE_COLUMNS = ("E", "S", "lambda", "d2S_dE2")
_FIELD_COLUMNS = ("x", "y", "u")

# verify refuses tolerances looser than the pinned suite tolerances
_VERIFY_MAX_NEWTON_TOL = 1e-8


@dataclasses.dataclass
class RunConfig:
    subcommand: str
    domain: str | None = None
    nx: int = 256
    ny: int = 256
    newton_tol: float = 1e-10
    eig_tol: float = 1e-10
    root_tol: float = 1e-12
    out: str | None = None
    seed: int = 42
    options: dict = dataclasses.field(default_factory=dict)


# ------------------------------------------------------------- formatting


def _g17(x: float) -> str:
    return "%.17g" % float(x)


def _json_text(obj, indent: int = 0) -> str:
    """Serialize with %.17g floats (NaN/inf become null)."""
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        rows = [f'{pad}  {json.dumps(str(k))}: {_json_text(v, indent + 1)}'
                for k, v in obj.items()]
        return "{\n" + ",\n".join(rows) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        rows = [f"{pad}  {_json_text(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(rows) + "\n" + pad + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return _g17(x) if math.isfinite(x) else "null"
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def _emit(cfg: RunConfig, suffix: str, text: str) -> None:
    if cfg.out:
        with open(f"{cfg.out}.{suffix}", "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _csv(columns, rows) -> str:
    lines = [",".join(columns)]
    lines += [",".join(r) for r in rows]
    return "\n".join(lines) + "\n"


def _branch_csv(br) -> str:
    rows = []
    for p in br.points:
        rows.append((
            _g17(br.alpha), _g17(p.lam), _g17(p.mu), _g17(p.sup_norm),
            _g17(p.energy), _g17(p.entropy), _g17(p.F_lambda),
            _g17(p.tau1), _g17(p.nu0), "1" if p.fold_flag else "0",
        ))
    return _csv(_BRANCH_COLUMNS, rows)


def _curve_csv(curve) -> str:
    rows = [(_g17(e), _g17(s), _g17(l), _g17(c))
            for e, s, l, c in zip(curve.E_grid, curve.S_grid,
                                  curve.lam_grid, curve.d2S_dE2)]
    return _csv(_CURVE_COLUMNS, rows)


def _field_csv(grid, u) -> str:
    rows = [(_g17(x), _g17(y), _g17(v))
            for x, y, v in zip(grid.x, grid.y, u)]
    return _csv(_FIELD_COLUMNS, rows)


# ---------------------------------------------------------------- parsing


def _parse_domain(spec: str):
    if spec == "disk":
        return Disk()
    if spec.startswith("ellipse:"):
        alpha = float(spec.split(":", 1)[1])
        if not 0.0 < alpha <= 1.0:
            raise ValueError(f"ellipse half-width {alpha} outside (0, 1]")
        return Ellipse(alpha)
    if spec.startswith("polygon:"):
        return load_polygon(spec.split(":", 1)[1])
    raise ValueError(f"domain spec {spec!r} (use disk | ellipse:A | polygon:FILE)")


def _resolve_grid(domain, grid_spec: str):
    if "x" in grid_spec:
        sx, sy = grid_spec.split("x", 1)
        nx, ny = int(sx), int(sy)
    else:
        nx, ny = auto_resolution(domain, int(grid_spec))
    for n in (nx, ny):
        if not RESOLUTION_MIN <= n <= RESOLUTION_MAX:
            raise ValueError(
                f"resolution {nx}x{ny} outside "
                f"[{RESOLUTION_MIN}, {RESOLUTION_MAX}] per axis")
    return nx, ny


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="mfe",
        description="Mean-field solver on thin and convex planar domains.")
    sub = ap.add_subparsers(dest="subcommand", required=True)

    def common(p, domain=True, param=False):
        if domain:
            p.add_argument("--domain", required=True,
                           help="disk | ellipse:A | polygon:FILE")
        p.add_argument("--grid", default="256",
                       help="N (auto-anisotropic) or NXxNY")
        p.add_argument("--out", default=None, metavar="PREFIX")
        p.add_argument("--newton-tol", type=float, default=1e-10)
        p.add_argument("--eig-tol", type=float, default=1e-10)
        p.add_argument("--root-tol", type=float, default=1e-12)
        p.add_argument("--seed", type=int, default=42)
        if param:
            grp = p.add_mutually_exclusive_group(required=True)
            grp.add_argument("--lambda", dest="lam", type=float)
            grp.add_argument("--mu", type=float)

    p = sub.add_parser("thresholds", help="closed-form threshold report")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--c", type=float, default=1.0)
    common(p, domain=False)

    p = sub.add_parser("solve", help="single Newton solve")
    common(p, param=True)

    p = sub.add_parser("branch", help="continue the solution branch")
    common(p)
    grp = p.add_mutually_exclusive_group(required=True)
    grp.add_argument("--to-lambda", type=float)
    grp.add_argument("--arclength", type=float)

    p = sub.add_parser("spectrum", help="stability eigenvalues at a solution")
    common(p, param=True)

    p = sub.add_parser("entropy", help="energy-entropy curve on an ellipse")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--lambda-max", type=float, required=True)
    common(p, domain=False)

    p = sub.add_parser("second", help="deflated search for a second solution")
    common(p)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--d", type=float, default=0.35)

    p = sub.add_parser("probe", help="multi-start uniqueness probe")
    common(p)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--e-cap", type=float, default=math.inf)
    p.add_argument("--starts", type=int, default=20)

    p = sub.add_parser("john", help="maximal inscribed ellipse of a polygon")
    common(p)

    p = sub.add_parser("verify", help="run the acceptance suite")
    common(p, domain=False)
    p.add_argument("--list", action="store_true", dest="list_only",
                   help="print criterion ids without running")
    p.add_argument("--ids", default=None,
                   help="comma-separated subset of criterion ids")
    p.add_argument("--jobs", type=int, default=1)
    return ap


def parse_args(argv) -> RunConfig:
    ap = _build_parser()
    ns = ap.parse_args(argv)
    cfg = RunConfig(subcommand=ns.subcommand,
                    domain=getattr(ns, "domain", None),
                    newton_tol=ns.newton_tol,
                    eig_tol=ns.eig_tol,
                    root_tol=ns.root_tol,
                    out=ns.out,
                    seed=ns.seed)
    for tol_name in ("newton_tol", "eig_tol", "root_tol"):
        if getattr(cfg, tol_name) <= 0.0:
            ap.error(f"--{tol_name.replace('_', '-')} must be positive")
    try:
        if cfg.domain is not None:
            cfg.nx, cfg.ny = _resolve_grid(_parse_domain(cfg.domain), ns.grid)
        elif ns.subcommand == "entropy":
            cfg.domain = f"ellipse:{ns.alpha}"
            cfg.nx, cfg.ny = _resolve_grid(_parse_domain(cfg.domain), ns.grid)
    except ValueError as exc:
        ap.error(str(exc))
    skip = {"subcommand", "domain", "grid", "out", "seed",
            "newton_tol", "eig_tol", "root_tol"}
    cfg.options = {k: v for k, v in vars(ns).items() if k not in skip}
    return cfg


# ------------------------------------------------------------ subcommands


def _cmd_thresholds(cfg: RunConfig) -> int:
    rep = closedform.thresholds_report(cfg.options["alpha"], cfg.options["c"])
    _emit(cfg, "thresholds.json", _json_text(dataclasses.asdict(rep)) + "\n")
    return 0


def _solve_state(cfg: RunConfig):
    grid = build_grid(_parse_domain(cfg.domain), cfg.nx, cfg.ny)
    if cfg.options.get("mu") is not None:
        mu = cfg.options["mu"]
        sol, rep = newton_Q(grid, mu)
        lam = lambda_of(grid, sol.u, sol.mu if sol.mu is not None else mu)
    else:
        lam = cfg.options["lam"]
        sol, rep = newton_P(grid, lam)
        mu = lam / mass_integral(grid, sol.u)
    return grid, sol, rep, float(sol.mu if sol.mu is not None else mu), lam


def _cmd_solve(cfg: RunConfig) -> int:
    grid, sol, rep, mu, lam = _solve_state(cfg)
    report = {
        "domain": cfg.domain,
        "nx": cfg.nx, "ny": cfg.ny,
        "mu": mu, "lambda": lam,
        "sup_u": sol.sup_norm,
        "residual": sol.residual_norm,
        "iterations": rep.iterations,
        "converged": sol.converged,
        "fold_limited": sol.fold_limited,
        "energy": energy(grid, sol.u, lam),
        "entropy": entropy(grid, delta_of(grid, sol.u)),
        "F_lambda": F_lambda(grid, sol.u, lam),
        "newton_tol": cfg.newton_tol,
    }
    if cfg.out:
        _emit(cfg, "field.csv", _field_csv(grid, sol.u))
    _emit(cfg, "report.json", _json_text(report) + "\n")
    return 0


def _cmd_branch(cfg: RunConfig) -> int:
    grid = build_grid(_parse_domain(cfg.domain), cfg.nx, cfg.ny)
    br = continue_branch(grid, control="lambda",
                         target=cfg.options.get("to_lambda"),
                         arclength=cfg.options.get("arclength"),
                         compute_spectrum=True)
    if br.truncated:
        log.info("branch truncated: %s", br.diagnostic)
    _emit(cfg, "branch.csv", _branch_csv(br))
    return 0


def _cmd_spectrum(cfg: RunConfig) -> int:
    grid, sol, _rep, mu, lam = _solve_state(cfg)
    spec = spectrum_at(grid, sol.u, lam=lam, mu=mu, tol=cfg.eig_tol)
    report = {"domain": cfg.domain, "nx": cfg.nx, "ny": cfg.ny,
              "mu": mu, "lambda": lam, "sup_u": sol.sup_norm,
              "tau0": spec["tau0"], "tau1": spec["tau1"], "nu0": spec["nu0"]}
    _emit(cfg, "spectrum.json", _json_text(report) + "\n")
    return 0


def _cmd_entropy(cfg: RunConfig) -> int:
    grid = build_grid(_parse_domain(cfg.domain), cfg.nx, cfg.ny)
    br = continue_branch(grid, control="lambda",
                         target=cfg.options["lambda_max"])
    curve = energy_entropy_along(br)
    _emit(cfg, "entropy.csv", _curve_csv(curve))
    return 0


def _cmd_second(cfg: RunConfig) -> int:
    grid = build_grid(_parse_domain(cfg.domain), cfg.nx, cfg.ny)
    lam = cfg.options["lam"]
    u_min, _ = newton_P(grid, lam)
    sol = second_solution(grid, lam, u_min.u, d=cfg.options["d"])
    report = {
        "domain": cfg.domain, "lambda": lam,
        "found": sol is not None,
        "sup_minimal": u_min.sup_norm,
        "F_minimal": F_lambda(grid, u_min.u, lam),
        "sup_second": math.nan if sol is None else sol.sup_norm,
        "F_second": math.nan if sol is None else F_lambda(grid, sol.u, lam),
        "energy_second": math.nan if sol is None else energy(grid, sol.u, lam),
        "concentration_second": math.nan if sol is None
        else concentration_fraction(grid, sol.u),
    }
    if cfg.out and sol is not None:
        _emit(cfg, "field.csv", _field_csv(grid, sol.u))
    _emit(cfg, "second.json", _json_text(report) + "\n")
    return 0


def _cmd_probe(cfg: RunConfig) -> int:
    grid = build_grid(_parse_domain(cfg.domain), cfg.nx, cfg.ny)
    pr = uniqueness_probe(grid, cfg.options["lam"],
                          e_cap=cfg.options["e_cap"],
                          n_starts=cfg.options["starts"], seed=cfg.seed)
    report = {
        "domain": cfg.domain, "lambda": cfg.options["lam"],
        "e_cap": cfg.options["e_cap"],
        "seed": pr.seed, "n_starts": len(pr.starts),
        "count": pr.count,
        "sup_norms": [s.sup_norm for s in pr.solutions],
        "excluded_concentrated": len(pr.excluded_concentrated),
        "starts": list(pr.starts),
    }
    _emit(cfg, "probe.json", _json_text(report) + "\n")
    return 0


def _cmd_john(cfg: RunConfig) -> int:
    domain = _parse_domain(cfg.domain)
    if not hasattr(domain, "vertices"):
        raise SystemExit("john requires a polygon domain (polygon:FILE)")
    center, B, area = john_ellipse(domain)
    report = {
        "domain": cfg.domain,
        "center": [float(center[0]), float(center[1])],
        "matrix": [[float(B[0, 0]), float(B[0, 1])],
                   [float(B[1, 0]), float(B[1, 1])]],
        "ellipse_area": float(area),
        "polygon_area": float(domain.area),
        "inscribed_ratio": inscribed_ratio(domain),
    }
    _emit(cfg, "john.json", _json_text(report) + "\n")
    return 0


def _cmd_verify(cfg: RunConfig) -> int:
    if cfg.options.get("list_only"):
        for cid, title in acceptance.list_ids():
            sys.stdout.write(f"{cid}\t{title}\n")
        return 0
    if cfg.newton_tol > _VERIFY_MAX_NEWTON_TOL:
        sys.stderr.write(
            f"verify: --newton-tol {cfg.newton_tol:g} is looser than the "
            f"pinned suite tolerance {_VERIFY_MAX_NEWTON_TOL:g}\n")
        return 2
    ids = None
    if cfg.options.get("ids"):
        ids = [t.strip() for t in cfg.options["ids"].split(",") if t.strip()]
    results = acceptance.run_all(ids=ids, jobs=cfg.options.get("jobs", 1))
    report = {
        "criteria": [{"id": r.cid, "title": r.title, "passed": r.passed,
                      "details": r.details} for r in results],
        "n_passed": sum(r.passed for r in results),
        "n_failed": sum(not r.passed for r in results),
        "all_passed": all(r.passed for r in results),
    }
    text = _json_text(report) + "\n"
    sys.stdout.write(text)
    if cfg.out:
        _emit(cfg, "verify.json", text)
    return 0 if report["all_passed"] else 1


_DISPATCH = {
    "thresholds": _cmd_thresholds,
    "solve": _cmd_solve,
    "branch": _cmd_branch,
    "spectrum": _cmd_spectrum,
    "entropy": _cmd_entropy,
    "second": _cmd_second,
    "probe": _cmd_probe,
    "john": _cmd_john,
    "verify": _cmd_verify,
}


def main(argv=None) -> int:
    cfg = parse_args(sys.argv[1:] if argv is None else argv)
    return _DISPATCH[cfg.subcommand](cfg)


if __name__ == "__main__":
    sys.exit(main())
