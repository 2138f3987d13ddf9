"""Command-line entry point: ``onofri-lab <command> [options]``.

Exit status: 0 success, 1 domain error, 2 numerical failure (including a
non-converged minimization or a failed acceptance check), 64 usage error.
Options may also come from a flat ``key=value`` file given with ``--config``;
explicit flags take precedence over the file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericalError, OnofriLabError

EXIT_OK, EXIT_DOMAIN, EXIT_NUMERICAL, EXIT_USAGE = 0, 1, 2, 64

log = logging.getLogger("onofri_lab")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


# ---------------------------------------------------------------------------
# emitters


def _clean(value):
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


def _fmt(value) -> str:
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    if value is None:
        return ""
    return str(value)


def to_json(record: dict) -> str:
    return json.dumps(_clean(record), indent=2, allow_nan=False) + "\n"


def to_csv(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def to_plain(record: dict, columns=None, rows=None) -> str:
    lines = [f"{k}: {_fmt(v)}" for k, v in record.items() if not isinstance(v, (list, dict))]
    if columns and rows is not None:
        lines.append("\t".join(columns))
        lines.extend("\t".join(_fmt(r[c]) for c in columns) for r in rows)
    return "\n".join(lines) + "\n"


@dataclass
class Output:
    record: dict
    columns: tuple = ()
    rows: list = field(default_factory=list)
    status: int = EXIT_OK
    text: str | None = None  # plain-format override

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return to_json(self.record)
        if fmt == "csv":
            if self.columns:
                return to_csv(self.columns, self.rows)
            keys = [k for k, v in self.record.items() if not isinstance(v, (list, dict))]
            return to_csv(keys, [self.record])
        return self.text if self.text is not None else to_plain(self.record, self.columns, self.rows)


def load_schema(command: str) -> dict:
    """The shipped JSON schema for ``command``'s ``--json`` output."""
    from importlib.resources import files

    return json.loads(files("onofri_lab").joinpath("schemas", f"{command}.schema.json").read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# parsing helpers


def parse_float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError as exc:
        raise DomainError(f"cannot parse number list {text!r}") from exc


def parse_peaks(text: str) -> list[float]:
    """``a:b:step`` (inclusive of b up to rounding) or a comma list."""
    text = str(text)
    if ":" not in text:
        return parse_float_list(text)
    parts = text.split(":")
    if len(parts) != 3:
        raise DomainError(f"peak range must be a:b:step, got {text!r}")
    a, b, step = (float(p) for p in parts)
    if step <= 0 or b < a:
        raise DomainError("peak range needs step > 0 and b >= a")
    count = int(math.floor((b - a) / step + 1e-9)) + 1
    return [a + i * step for i in range(count)]


def read_config(path: str) -> dict:
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise UsageError(f"{path}:{lineno}: expected key=value")
                key, value = (s.strip() for s in line.split("=", 1))
                out[key.replace("-", "_")] = value
    except OSError as exc:
        raise UsageError(f"cannot read config file {path!r}: {exc}") from exc
    return out


# ---------------------------------------------------------------------------
# commands


def cmd_constants(args) -> Output:
    from .constants import bundle, sharp_constant

    c = bundle(args.dim)
    sc = sharp_constant(args.dim, args.quad_tol)
    rec = c.as_dict()
    rec["sharp_quadrature"] = sc.by_quadrature
    rec["sharp_closed_form"] = sc.by_closed_form
    return Output(rec)


BRANCH_COLUMNS = ("peak_v", "lambda", "mass", "peak_u", "energy_J", "pohozaev_residual", "epsilon", "farfield_slope")


def cmd_branch(args) -> Output:
    from .radial_ode import farfield_slope, rescale_to_bubble, scan_branch

    branch = scan_branch(args.dim, parse_peaks(args.peaks), args.ode_tol)
    rows = []
    for p in branch.points:
        res = rescale_to_bubble(p)
        try:
            slope = farfield_slope(p) if res.in_blowup_regime else math.nan
        except OnofriLabError:
            slope = math.nan
        rows.append(
            {
                "peak_v": p.peak_v,
                "lambda": p.lam,
                "mass": p.mass,
                "peak_u": p.peak_u,
                "energy_J": p.energy_J,
                "pohozaev_residual": p.pohozaev_residual,
                "epsilon": res.epsilon,
                "farfield_slope": slope,
            }
        )
    for peak, msg in branch.failures:
        log.warning("peak %r failed: %s", peak, msg)
    rec = {
        "n": args.dim,
        "rows": rows,
        "failures": [{"peak": peak, "error": msg} for peak, msg in branch.failures],
    }
    status = EXIT_NUMERICAL if not rows else EXIT_OK
    return Output(rec, BRANCH_COLUMNS, rows, status)


def cmd_bubble_limit(args) -> Output:
    from .constants import sharp_constant_closed_form
    from .functional import concentration_limit

    lim = concentration_limit(args.dim, parse_float_list(args.L), args.quad_tol)
    target = sharp_constant_closed_form(args.dim)
    rows = [{"L": L, "J_value": v, "gap_to_sharp": v - target} for L, v in zip(lim.L, lim.values)]
    rec = {
        "n": args.dim,
        "rows": rows,
        "extrapolated": lim.extrapolated,
        "sharp_constant": target,
        "reliable": lim.reliable,
        "fit": lim.fit,
    }
    return Output(rec, ("L", "J_value", "gap_to_sharp"), rows)


def _minimize_options(args):
    from .minimizer import MinimizeOptions

    return MinimizeOptions(grid_size=args.grid, grid_kind=args.grid_kind, max_iters=args.max_iters, grad_tol=args.grad_tol)


def cmd_minimize(args) -> Output:
    from .constants import bundle
    from .minimizer import minimize_subcritical

    rho = args.rho_frac * bundle(args.dim).c_crit
    res = minimize_subcritical(args.dim, rho, _minimize_options(args))
    rows = [{"r": float(r), "u": float(u)} for r, u in zip(res.nodes, res.nodal_values)]
    rec = {
        "n": args.dim,
        "rho_frac": args.rho_frac,
        "rho": rho,
        "J_value": res.J_value,
        "el_residual": res.el_residual,
        "iterations": res.iterations,
        "converged": res.converged,
        "peak": res.peak,
        "lambda": res.lam,
        "epsilon": res.epsilon,
        "grid_size": args.grid,
    }
    return Output(rec, ("r", "u"), rows, EXIT_OK if res.converged else EXIT_NUMERICAL, to_plain(rec))


TRACE_COLUMNS = ("rho", "peak", "mass", "epsilon", "J_value", "converged", "el_residual")


def cmd_blowup_trace(args) -> Output:
    from dataclasses import asdict

    from .constants import bundle
    from .minimizer import trace_blowup

    c = bundle(args.dim).c_crit
    recs = trace_blowup(args.dim, [f * c for f in parse_float_list(args.rho_fracs)], _minimize_options(args))
    rows = [asdict(r) for r in recs]
    status = EXIT_OK if all(r.converged for r in recs) else EXIT_NUMERICAL
    return Output({"n": args.dim, "rows": rows}, TRACE_COLUMNS, rows, status)


def cmd_capacity(args) -> Output:
    from .capacity import AnnulusSpec, annulus_capacity, n_modulus, potential_energy

    spec = AnnulusSpec(args.dim, args.outer, args.inner, args.level)
    c = annulus_capacity(spec)
    rec = {
        "n": args.dim,
        "outer": args.outer,
        "inner": args.inner,
        "level": args.level,
        "capacity": c,
        "n_modulus": n_modulus(args.dim, c),
        "potential_energy": potential_energy(spec, args.quad_tol),
    }
    return Output(rec)


def _domain(args):
    from .harmonic_radius import DomainSpec

    if args.disk_offset is not None:
        return DomainSpec.disk(args.disk_offset)
    return DomainSpec.ball(args.dim, args.radius)


def cmd_harmonic_radius(args) -> Output:
    from .harmonic_radius import robin_data

    dom = _domain(args)
    data = robin_data(dom)
    rec = {
        "domain": dom.kind,
        "n": dom.n,
        "radius": dom.R,
        "offset": dom.offset,
        "green_singular_coeff": data.green_singular_coeff,
        "robin": data.robin,
        "harmonic_radius": data.harmonic_radius,
    }
    return Output(rec)


def cmd_concentration_level(args) -> Output:
    from .constants import sharp_constant_closed_form
    from .harmonic_radius import concentration_level, robin_data

    dom = _domain(args)
    rec = {
        "n": args.dim,
        "domain": dom.kind,
        "offset": dom.offset,
        "radius": dom.R,
        "harmonic_radius": robin_data(dom).harmonic_radius,
        "sharp_constant": sharp_constant_closed_form(args.dim),
        "concentration_level": concentration_level(args.dim, dom),
    }
    return Output(rec)


def cmd_criterion(args) -> Output:
    from .constants import sharp_constant_closed_form
    from .harmonic_radius import existence_criterion

    verdict = existence_criterion(args.dim, args.inf, args.sup_log_radius)
    rec = {
        "n": args.dim,
        "candidate_inf": args.inf,
        "sup_log_radius": args.sup_log_radius,
        "threshold": sharp_constant_closed_form(args.dim) - args.dim * args.sup_log_radius,
        "verdict": verdict,
    }
    return Output(rec)


def cmd_pohozaev_check(args) -> Output:
    from .radial_ode import _log_lam, branch_point, pohozaev_sides

    p = branch_point(args.dim, args.peak, args.ode_tol)
    lhs, rhs = pohozaev_sides(p.n, p.lam, p.profile, _log_lam(p))
    rec = {
        "n": args.dim,
        "peak_v": p.peak_v,
        "lambda": p.lam,
        "mass": p.mass,
        "lhs": lhs,
        "rhs": rhs,
        "residual": p.pohozaev_residual,
        "passed": bool(p.pohozaev_residual <= args.max_residual),
    }
    status = EXIT_OK if rec["passed"] else EXIT_NUMERICAL
    return Output(rec, status=status)


VERIFY_COLUMNS = ("criterion", "name", "passed", "measured", "target", "tolerance", "detail")


def cmd_verify_all(args) -> Output:
    from .acceptance import verify_all

    report = verify_all(args.dim, args.level)
    rec = report.as_dict()
    rows = [r.as_dict() for r in report.results]
    text = "\n".join(r.line() for r in report.results) + f"\n{'all checks passed' if report.passed else 'FAILED'}\n"
    return Output(rec, VERIFY_COLUMNS, rows, EXIT_OK if report.passed else EXIT_NUMERICAL, text)


# ---------------------------------------------------------------------------
# parser


def _common(p, default_format="plain"):
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--format", choices=("json", "csv", "plain"), default=default_format)
    p.add_argument("--json", action="store_const", const="json", dest="format")
    p.add_argument("--csv", nargs="?", const="-", default=None, metavar="PATH", dest="csv_path")
    p.add_argument("--output", default=None)


COMMANDS = {}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="onofri-lab", description="n-Laplacian mean field and Moser-Onofri numerical lab")
    parser.add_argument("--config", default=None, help="flat key=value file; flags override it")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, func, help_text, default_format="plain"):
        p = sub.add_parser(name, help=help_text)
        _common(p, default_format)
        p.set_defaults(func=func)
        COMMANDS[name] = p
        return p

    p = add("constants", cmd_constants, "dimensional constants and the sharp constant")
    p.add_argument("--quad-tol", type=float, default=1e-11)

    p = add("branch", cmd_branch, "scan the radial solution branch", "csv")
    p.add_argument("--peaks", required=True)
    p.add_argument("--tol", "--ode-tol", type=float, default=1e-10, dest="ode_tol")

    p = add("bubble-limit", cmd_bubble_limit, "J_{C_n} on the test-function family", "csv")
    p.add_argument("--L", default="1e-1,1e-2,1e-3,1e-4")
    p.add_argument("--quad-tol", type=float, default=1e-11)

    def minimize_opts(p):
        p.add_argument("--grid", type=int, default=512)
        p.add_argument("--grid-kind", choices=("uniform", "graded"), default="graded")
        p.add_argument("--max-iters", type=int, default=200)
        p.add_argument("--grad-tol", type=float, default=1e-9)

    p = add("minimize", cmd_minimize, "minimize the subcritical functional")
    p.add_argument("--rho-frac", type=float, required=True)
    minimize_opts(p)

    p = add("blowup-trace", cmd_blowup_trace, "minimizers along rho -> C_n", "csv")
    p.add_argument("--rho-fracs", default="0.9,0.99,0.999")
    minimize_opts(p)

    p = add("capacity", cmd_capacity, "capacity of a concentric annulus")
    p.add_argument("--outer", type=float, required=True)
    p.add_argument("--inner", type=float, required=True)
    p.add_argument("--level", type=float, default=1.0)
    p.add_argument("--quad-tol", type=float, default=1e-11)

    for name, func, text in (
        ("harmonic-radius", cmd_harmonic_radius, "Robin function and harmonic radius"),
        ("concentration-level", cmd_concentration_level, "optimal concentration level"),
    ):
        p = add(name, func, text)
        p.add_argument("--disk-offset", type=float, default=None)
        p.add_argument("--radius", type=float, default=1.0)

    p = add("criterion", cmd_criterion, "sufficient existence criterion")
    p.add_argument("--inf", type=float, required=True)
    p.add_argument("--sup-log-radius", type=float, required=True)

    p = add("pohozaev-check", cmd_pohozaev_check, "Pohozaev identity on one branch point")
    p.add_argument("--peak", type=float, required=True)
    p.add_argument("--tol", "--ode-tol", type=float, default=1e-10, dest="ode_tol")
    p.add_argument("--max-residual", type=float, default=1e-6)

    p = add("verify-all", cmd_verify_all, "run every acceptance check")
    p.add_argument("--level", choices=("quick", "full"), default="quick")
    return parser


_BOOL_KEYS = {"verbose"}


def _apply_config(parser, argv: list[str]) -> list[str]:
    pre = _Parser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return argv
    cfg = read_config(known.config)
    command = cfg.pop("command", None)
    if not any(tok in COMMANDS for tok in argv) and command:
        if command not in COMMANDS:
            raise UsageError(f"unknown command {command!r} in config file")
        i = 0
        while i < len(argv):
            if argv[i] == "--config":
                i += 2
            elif argv[i].startswith("--config=") or argv[i] in ("-v", "--verbose"):
                i += 1
            else:
                break
        argv = argv[:i] + [command] + argv[i:]
    chosen = next((tok for tok in argv if tok in COMMANDS), None)
    if chosen is None:
        return argv
    sub = COMMANDS[chosen]
    dests = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in cfg.items():
        key = {"json": "format", "csv": "csv_path", "tol": "ode_tol"}.get(key, key)
        if key not in dests:
            raise UsageError(f"config key {key!r} is not an option of {chosen!r}")
        action = dests[key]
        if key == "format" and value.lower() in ("true", "1", "yes"):
            value = "json"
        if action.type is not None:
            try:
                value = action.type(value)
            except ValueError as exc:
                raise UsageError(f"config key {key!r}: {exc}") from exc
        defaults[key] = value
        action.required = False
    sub.set_defaults(**defaults)
    return argv


@dataclass(frozen=True)
class RunConfig:
    command: str
    dim: int
    params: dict
    output_format: str
    output_path: str | None


def config_from_args(ns) -> RunConfig:
    fmt = ns.format
    path = ns.output
    if ns.csv_path is not None:
        fmt = "csv"
        if ns.csv_path != "-":
            path = ns.csv_path
    params = {k: v for k, v in vars(ns).items() if k not in ("command", "func", "format", "output", "csv_path", "config")}
    return RunConfig(ns.command, ns.dim, params, fmt, path)


def run(config: RunConfig, func) -> int:
    ns = argparse.Namespace(dim=config.dim, **{k: v for k, v in config.params.items() if k != "dim"})
    if config.dim < 2:
        raise DomainError(f"dimension must be an integer >= 2, got {config.dim}")
    out = func(ns)
    text = out.render(config.output_format)
    if config.output_path:
        with open(config.output_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return out.status


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config(parser, argv)
        ns = parser.parse_args(argv)
        if ns.command is None:
            raise UsageError(parser.format_usage())
    except UsageError as exc:
        sys.stderr.write(str(exc).rstrip("\n") + "\n")
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        return run(config_from_args(ns), ns.func)
    except DomainError as exc:
        sys.stderr.write(f"domain error: {exc}\n")
        return EXIT_DOMAIN
    except NumericalError as exc:
        sys.stderr.write(f"numerical error: {exc}\n")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
