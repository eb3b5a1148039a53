"""Command-line front end: ``sphrect <subcommand> ...``.

Angles are given as the integer parts A0,A1,A2,A3; corner j then has angle
(A_j + 1/2) half-turns.  Every run writes its resolved configuration first
(a "config" key in JSON, comment lines in CSV and DOT).  Exit status is 0
when every requested computation converged, 1 when one did not, 2 on bad
input.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field

from . import __version__
from .darboux import DarbouxError, solve_darboux
from .families import limit_modulus_extrapolate, limit_modulus_sc, trace_family, default_a_grid
from .netcalc import AngleQuadruple, count, delta, enumerate_nets, relabel_marking
from .netgraph import realize, validate
from .periods import default_scan, solve_lambda

log = logging.getLogger("sphrect")

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    subcommand: str
    angles: tuple[int, int, int, int]
    format: str = "json"
    output: str | None = None
    a: float | None = None
    lam: float | None = None
    scan: tuple[float, float] | None = None
    grid: int = 2000
    xtol: float = 1e-14
    kind: str = "first"
    index: int | None = None
    branch: int | None = None
    a_start: float = 1.001
    points: int = 32
    a_max: float = 1e3
    method: str = "both"
    extra: dict = field(default_factory=dict)

    def check(self):
        if self.grid < 16:
            raise UsageError(f"grid must be at least 16, got {self.grid}")
        if not self.xtol > 0:
            raise UsageError(f"xtol must be positive, got {self.xtol}")
        if self.a is not None and not self.a > 1:
            raise UsageError(f"a must exceed 1, got {self.a}")
        if not self.a_start > 1 or not self.a_max > self.a_start:
            raise UsageError("need 1 < a-start < a-max")
        if self.points < 4:
            raise UsageError(f"points must be at least 4, got {self.points}")
        if self.scan is not None and not self.scan[0] < self.scan[1]:
            raise UsageError(f"scan needs lo < hi, got {self.scan}")

    def to_json(self) -> dict:
        d = asdict(self)
        d["angles"] = list(self.angles)
        d["lambda"] = d.pop("lam")
        d["type"] = d.pop("kind")
        d["version"] = __version__
        if d["scan"] is not None:
            d["scan"] = list(d["scan"])
        extra = d.pop("extra")
        d.update(extra)
        return d


# --- output --------------------------------------------------------------------

def _num(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    s = format(x, ".17g")
    if all(c not in s for c in ".en"):
        s += ".0"
    return s


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with every float written to 17 significant digits; nan and inf become null."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return json.dumps(obj)
    if isinstance(obj, float):
        return _num(obj)
    if hasattr(obj, "item") and callable(obj.item):      # numpy scalars
        return dumps(obj.item(), indent, _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _header_lines(cfg: RunConfig, prefix: str) -> list[str]:
    return [f"{prefix} {k}={json.dumps(v)}" for k, v in cfg.to_json().items()]


def _emit(text: str, cfg: RunConfig):
    if not text.endswith("\n"):
        text += "\n"
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --- subcommands ---------------------------------------------------------------

def _first_type_angles(q: AngleQuadruple) -> tuple[AngleQuadruple, bool]:
    if q.two_delta <= -2:
        return relabel_marking(q), True
    return q, False


def cmd_classify(cfg: RunConfig):
    q = AngleQuadruple.of(cfg.angles)
    rep = count(q)
    view, relabeled = _first_type_angles(q)
    nets = enumerate_nets(view) if rep.exists else []
    out = {"angles": q.to_json(), "delta": float(delta(q)), **rep.to_json()}
    if relabeled:
        out["relabeled_as"] = view.to_json()
        out["note"] = "delta <= -1; nets listed for the marking shifted by one corner"
    out["nets"] = [p.to_json() for p in nets]
    return out, True


def cmd_net(cfg: RunConfig):
    q = AngleQuadruple.of(cfg.angles)
    view, relabeled = _first_type_angles(q)
    nets = enumerate_nets(view)
    if not 0 <= cfg.index < len(nets):
        raise UsageError(f"net index {cfg.index} out of range; {tuple(q)} has {len(nets)} first-type nets")
    g = realize(nets[cfg.index])
    problems = validate(g)
    if cfg.format == "dot":
        return g.to_dot(), not problems
    out = g.to_json()
    if relabeled:
        out["relabeled_as"] = view.to_json()
    out["problems"] = [[str(k), str(v)] for k, v in problems]
    return out, not problems


def cmd_darboux(cfg: RunConfig):
    d = solve_darboux(cfg.angles, cfg.a, cfg.lam)
    return d.to_json(), True


def cmd_solve(cfg: RunConfig):
    scan = cfg.scan or default_scan(cfg.angles, cfg.a)
    cfg.extra["resolved_scan"] = list(scan)
    roots = solve_lambda(cfg.angles, cfg.a, scan=scan, grid=cfg.grid, kind=cfg.kind, xtol=cfg.xtol)
    return {"roots": [r.to_json() for r in roots]}, True


def _curves(cfg: RunConfig):
    grid = default_a_grid(cfg.a_start, cfg.points, cfg.a_max)
    return trace_family(cfg.angles, a_start=cfg.a_start, a_grid=grid, grid=cfg.grid)


def cmd_trace(cfg: RunConfig):
    curves = _curves(cfg)
    if not 0 <= cfg.branch < len(curves):
        raise UsageError(f"branch {cfg.branch} out of range; {len(curves)} traced")
    c = curves[cfg.branch]
    cfg.extra.update({"K_crit": c.K_crit, "lost_at": c.lost_at, "endpoint": c.endpoint.value})
    if cfg.format == "json":
        return c.to_json(), True
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["a", "lambda", "K", "theta", "residual"])
    for p in c.points:
        th = "" if p.theta_est is None else _num(p.theta_est)
        w.writerow([_num(p.a), _num(p.lambda_star), _num(p.K), th, _num(p.residual)])
    return buf.getvalue(), True


def cmd_limits(cfg: RunConfig):
    q = AngleQuadruple.of(cfg.angles)
    rows, ok = [], True
    n = count(q).first_type_count
    if cfg.method in ("both", "extrapolation"):
        curves = _curves(cfg)
        ok &= len(curves) == n
        for c in curves:
            try:
                rows.append(limit_modulus_extrapolate(c).to_json())
            except ValueError as exc:
                ok = False
                rows.append({"net_index": c.branch, "method": "Extrapolation", "error_record": str(exc)})
    if cfg.method in ("both", "sc"):
        if q.total % 2:
            cfg.extra["sc_skipped"] = "odd sum of A_j"
        else:
            sc = limit_modulus_sc(q)
            ok &= len(sc) == n
            rows.extend(r.to_json() for r in sc)
    return {"expected_count": n, "limits": rows}, ok


COMMANDS = {
    "classify": cmd_classify, "net": cmd_net, "darboux": cmd_darboux,
    "solve": cmd_solve, "trace": cmd_trace, "limits": cmd_limits,
}


# --- parsing -------------------------------------------------------------------

def parse_angles(text: str) -> tuple[int, int, int, int]:
    parts = text.replace(" ", "").split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(f"expected four integers A0,A1,A2,A3, got {text!r}")
    try:
        vals = tuple(int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"angles must be integers, got {text!r}") from None
    if any(v < 0 for v in vals):
        raise argparse.ArgumentTypeError(f"angles must be non-negative, got {text!r}")
    return vals


def parse_pair(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo,hi, got {text!r}") from None
    return lo, hi


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="sphrect",
        description="Nets, Heun accessory parameters and moduli of spherical rectangles. "
                    "Angles are the integer parts A0,A1,A2,A3 of the corner angles (A_j + 1/2).",
    )
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="subcommand", required=True)

    def common(p, formats=("json",)):
        p.add_argument("-o", "--output", help="write here instead of stdout")
        p.add_argument("--format", choices=formats, default=formats[0])

    p = sub.add_parser("classify", help="existence, counts and the list of nets")
    p.add_argument("angles", type=parse_angles)
    common(p)

    p = sub.add_parser("net", help="one realized net as JSON or DOT")
    p.add_argument("angles", type=parse_angles)
    p.add_argument("--index", type=int, required=True)
    common(p, ("json", "dot"))

    p = sub.add_parser("darboux", help="polynomial P, its roots and residues at (a, lambda)")
    p.add_argument("--angles", type=parse_angles, required=True)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    common(p)

    p = sub.add_parser("solve", help="unitary accessory parameters at fixed a")
    p.add_argument("--angles", type=parse_angles, required=True)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--scan", type=parse_pair)
    p.add_argument("--grid", type=int, default=2000)
    p.add_argument("--xtol", type=float, default=1e-14)
    p.add_argument("--type", dest="kind", choices=("first", "second"), default="first")
    common(p)

    for name, helptext in (("trace", "one traced family as CSV"), ("limits", "K_crit per net")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--angles", type=parse_angles, required=True)
        p.add_argument("--a-start", type=float, default=1.001)
        p.add_argument("--a-max", type=float, default=1e3)
        p.add_argument("--points", type=int, default=32)
        p.add_argument("--grid", type=int, default=2000)
        if name == "trace":
            p.add_argument("--branch", type=int, default=0)
            common(p, ("csv", "json"))
        else:
            p.add_argument("--method", choices=("both", "extrapolation", "sc"), default="both")
            common(p)
    return ap


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    keys = set(RunConfig.__dataclass_fields__) - {"extra"}
    kw = {k: v for k, v in vars(ns).items() if k in keys and v is not None}
    kw["angles"] = tuple(ns.angles)
    cfg = RunConfig(**kw)
    cfg.check()
    return cfg


def _render(cfg: RunConfig, result) -> str:
    if cfg.format == "json":
        return dumps({"config": cfg.to_json(), "result": result})
    prefix = "//" if cfg.format == "dot" else "#"
    return "\n".join(_header_lines(cfg, prefix)) + "\n" + result


def main(argv=None) -> int:
    ap = build_parser()
    ns = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    cfg = None
    try:
        cfg = config_from_args(ns)
        result, ok = COMMANDS[cfg.subcommand](cfg)
    except (UsageError, ValueError, DarbouxError) as exc:
        code = EXIT_USAGE if isinstance(exc, UsageError) else EXIT_FAILED
        record = {"config": cfg.to_json() if cfg else {"subcommand": ns.subcommand},
                  "error": {"type": type(exc).__name__, "message": str(exc)}}
        sys.stdout.write(dumps(record) + "\n")
        print(f"sphrect: {exc}", file=sys.stderr)
        return code
    _emit(_render(cfg, result), cfg)
    return EXIT_OK if ok else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
