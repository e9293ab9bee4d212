# cli.py - kw-graph command-line entry point
from __future__ import annotations

import argparse
import logging
import sys
from typing import Any, Callable, Dict, List, Optional, Tuple

import pandas as pd

from . import config
from .continuation import branch_scan, estimate_c_h, estimate_lambda_star
from .degree import degree_invariance_sweep, degree_numeric, interpolate_path, schur_reduce
from .exceptions import InvalidOptions, KWError, NoConvergence
from .model import classify_regime
from .problem_io import (
    h_from_dict,
    lambda_from_dict,
    load_json,
    parse_floats,
    problem_from_dict,
    sweep_from_dict,
)
from .report import emit, frame_to_csv, solutions_frame, to_json
from .solve import (
    SolveOptions,
    enumerate_escalating,
    enumerate_solutions,
    newton_solve,
    solve_negative_via_supersolution,
)
from .verify import run_all

log = logging.getLogger(__name__)

# (text, exit code)
Result = Tuple[str, int]

# comma-list options whose values may start with a minus sign
LIST_OPTIONS = ("--grid", "--u0")


# ---------------- helpers ----------------
def _render(fmt: str, payload: Dict[str, Any], frame: Optional[pd.DataFrame] = None,
            csv_text: Optional[str] = None) -> str:
    if fmt == "json":
        return to_json(payload)
    if csv_text is not None:
        return csv_text
    if frame is None:
        raise InvalidOptions("this command has no CSV form; use --format json")
    return frame_to_csv(frame)


def _options(args, cfg: Dict[str, Any]) -> SolveOptions:
    return SolveOptions.from_config(
        cfg,
        tol_residual=args.tol,
        start_box_radius=args.radius,
        n_starts=args.starts,
        rng_seed=args.seed,
        escalate=args.escalate,
    )


def _join_list_args(argv: List[str]) -> List[str]:
    """``--grid -0.3,-0.1`` -> ``--grid=-0.3,-0.1`` (same for --u0)."""
    out: List[str] = []
    it = iter(argv)
    for tok in it:
        if tok in LIST_OPTIONS:
            nxt = next(it, None)
            if nxt is None:
                out.append(tok)
            elif nxt.startswith("-") and len(nxt) > 1 and (nxt[1].isdigit() or nxt[1] == "."):
                out.append(f"{tok}={nxt}")
            else:
                out.extend([tok, nxt])
        else:
            out.append(tok)
    return out


def _log_handler(verbose: bool, quiet: bool) -> logging.Handler:
    level = logging.DEBUG if verbose else logging.ERROR if quiet else logging.WARNING
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("[%(levelname)s] %(name)s: %(message)s"))
    pkg = logging.getLogger("kw_graph")
    pkg.setLevel(level)
    pkg.addHandler(handler)
    return handler


# ---------------- commands ----------------
def _cmd_solve(args, cfg, opts) -> Result:
    p = problem_from_dict(load_json(args.input))
    u0 = parse_floats(args.u0)
    if u0 is not None:
        sol = newton_solve(p, u0, opts)
    elif p.is_scalar and p.c < 0.0:
        sol = solve_negative_via_supersolution(p, opts)
    else:
        sols = enumerate_solutions(p, opts)
        if not sols:
            raise NoConvergence("no root found from any start")
        sol = sols[0]
    payload = {"solution": sol.to_dict(), "regime": classify_regime(p).to_dict()}
    return _render(args.format, payload, solutions_frame([sol])), 0


def _cmd_enumerate(args, cfg, opts) -> Result:
    p = problem_from_dict(load_json(args.input))
    sols, radius = enumerate_escalating(p, opts)
    payload = {"solutions": [s.to_dict() for s in sols], "count": len(sols), "radius_used": radius}
    return _render(args.format, payload, solutions_frame(sols)), 0


def _cmd_degree(args, cfg, opts) -> Result:
    p = problem_from_dict(load_json(args.input))
    rep = degree_numeric(p, opts)
    code = 0 if rep.numeric_degree is not None else 3
    if code:
        print("[WARN] degenerate root found; numeric degree undefined", file=sys.stderr)
    return _render(args.format, rep.to_dict(), solutions_frame(rep.solutions)), code


def _cmd_reduce(args, cfg, opts) -> Result:
    p = problem_from_dict(load_json(args.input))
    red, _ = schur_reduce(p)
    return _render(args.format, red.to_dict()), 0


def _cmd_sweep(args, cfg, opts) -> Result:
    p0, p1 = sweep_from_dict(load_json(args.input))
    n = args.waypoints or int(cfg["sweep_waypoints"])
    rep = degree_invariance_sweep(interpolate_path(p0, p1, n), opts)
    return _render(args.format, rep.to_dict(), pd.DataFrame(rep.rows)), 0


def _cmd_ch(args, cfg, opts) -> Result:
    g, h = h_from_dict(load_json(args.input))
    br = estimate_c_h(g, h, opts, bracket_tol=args.bracket_tol or cfg["bracket_tol"])
    return _render(args.format, br.to_dict()), 0


def _cmd_lambdastar(args, cfg, opts) -> Result:
    g, K, kappa = lambda_from_dict(load_json(args.input))
    br, table = estimate_lambda_star(g, K, kappa, opts, bracket_tol=args.bracket_tol or cfg["bracket_tol"])
    payload = {"bracket": br.to_dict(), "table": table.to_frame().to_dict(orient="records")}
    return _render(args.format, payload, csv_text=table.to_csv()), 0


def _cmd_scan(args, cfg, opts) -> Result:
    g, h = h_from_dict(load_json(args.input))
    grid = parse_floats(args.grid)
    if grid is None:
        raise InvalidOptions("scan needs --grid with a comma-separated list of c values")
    table = branch_scan(g, h, grid, opts)
    payload = {"rows": table.to_frame().to_dict(orient="records"), "envelope": table.envelope}
    return _render(args.format, payload, csv_text=table.to_csv()), 0


def _cmd_verify(args, cfg, opts) -> Result:
    if not (0.0 < args.scale <= 1.0):
        raise InvalidOptions(f"--scale must lie in (0, 1], got {args.scale}")
    rep = run_all(seed=args.seed if args.seed is not None else int(cfg["rng_seed"]), scale=args.scale, opts=opts)
    if not args.quiet:
        for s in rep["suites"]:
            tag = "[OK]" if s["ok"] else "[FAIL]"
            print(f"{tag} {s['name']}: passed={s['passed']} failed={s['failed']} "
                  f"degenerate={s['degenerate']}", file=sys.stderr)
    frame = pd.DataFrame([{k: s[k] for k in ("name", "passed", "failed", "degenerate", "ok")}
                          for s in rep["suites"]])
    return _render(args.format, rep, frame), 0 if rep["ok"] else 1


COMMANDS: Dict[str, Callable[..., Result]] = {
    "solve": _cmd_solve,
    "enumerate": _cmd_enumerate,
    "degree": _cmd_degree,
    "reduce": _cmd_reduce,
    "sweep": _cmd_sweep,
    "ch": _cmd_ch,
    "lambdastar": _cmd_lambdastar,
    "scan": _cmd_scan,
    "verify": _cmd_verify,
}


# ---------------- parser ----------------
def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", "-i", default=None, help="problem JSON (- for stdin)")
    common.add_argument("--output", "-o", default=None, help="report path (stdout when omitted)")
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--seed", type=int, default=None, help="multistart seed (config rng_seed)")
    common.add_argument("--tol", type=float, default=None, help="residual tolerance")
    common.add_argument("--radius", type=float, default=None, help="start box radius R")
    common.add_argument("--starts", type=int, default=None, help="number of multistart points")
    common.add_argument("--escalate", type=int, default=None, help="max radius doublings")
    common.add_argument("--config", default=None, help="YAML file over the packaged defaults")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    common.add_argument("-q", "--quiet", action="store_true", help="errors only")

    ap = argparse.ArgumentParser(
        prog="kw-graph",
        description="Kazdan-Warner equations on finite weighted graphs: solve, count, degree, continuation",
    )
    sub = ap.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("solve", parents=[common], help="one solution")
    s.add_argument("--u0", default=None, help="Newton start, comma list (one value per vertex)")
    sub.add_parser("enumerate", parents=[common], help="all roots found by seeded multistart")
    sub.add_parser("degree", parents=[common], help="numeric vs exact Brouwer degree")
    sub.add_parser("reduce", parents=[common], help="Schur-eliminate the vertices where h = 0")
    s = sub.add_parser("sweep", parents=[common], help="degree along a linear path to the \"to\" problem")
    s.add_argument("--waypoints", type=int, default=None)
    for name, help_ in (("ch", "bracket the threshold c_h"), ("lambdastar", "bracket λ* of the K + λ family")):
        s = sub.add_parser(name, parents=[common], help=help_)
        s.add_argument("--bracket-tol", type=float, default=None)
    s = sub.add_parser("scan", parents=[common], help="root counts over a c grid")
    s.add_argument("--grid", default=None, help="ascending comma list of c values")
    s = sub.add_parser("verify", parents=[common], help="run the bundled self-checks")
    s.add_argument("--scale", type=float, default=1.0, help="fraction of the full randomized sizes")
    return ap


# ---------------- main ----------------
def main(argv=None) -> int:
    args = build_parser().parse_args(_join_list_args(sys.argv[1:] if argv is None else list(argv)))
    handler = _log_handler(args.verbose, args.quiet)
    try:
        cfg = config.load(args.config)
        if args.tol is not None:
            cfg["tol_residual"] = args.tol
        config.apply(cfg)
        log.debug("running %s with %s", args.cmd, cfg)
        opts = _options(args, cfg)
        text, code = COMMANDS[args.cmd](args, cfg, opts)
        emit(text, args.output)
        if args.output and not args.quiet:
            print(f"[OK] wrote {args.output}", file=sys.stderr)
        return code
    except KWError as e:
        print(f"[ERROR] {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"[ERROR] {e}", file=sys.stderr)
        return 2
    finally:
        config.apply(config.DEFAULT)
        logging.getLogger("kw_graph").removeHandler(handler)
