"""Command-line interface: ``report``, ``sweep`` and ``verify``.

Exit codes: 0 success, 1 configuration or validation error, 2 a
verification check failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys

from . import analytics, risk
from .model import ConfidenceLevel, Diversification, ModelParams, ValidationError, validate
from .oracles import QuantileGuardError
from .verify import VerifyConfig, run_all, unit_grid

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY = 0, 1, 2

CSV_HEADER = ["r1", "r2", "p_ind_1", "p_ind_2", "p_joint", "p_aggregate", "w", "cov",
              "var_1", "var_2", "var_sys", "es_1", "es_2", "skip_reason"]

DEFAULTS = {
    "s": 1.0, "d": 0.25, "r1": 0.0, "r2": 0.0, "alpha": 0.95, "grid_step": 0.05,
    "samples": 1_000_000, "seed": 42, "streams": 1, "out": None,
}
TYPES = {"s": float, "d": float, "r1": float, "r2": float, "alpha": float, "grid_step": float,
         "samples": int, "seed": int, "streams": int, "out": str}


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def read_config(path: str) -> dict:
    """Parse a plain ``key=value`` file; blank lines and ``#`` comments ignored."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key not in TYPES:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[key] = TYPES[key](value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {value!r}") from exc
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="divrisk", description="Two-bank diversification risk analytics.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, *names):
        for name in names:
            p.add_argument("--" + name.replace("_", "-"), dest=name, type=TYPES[name], default=None)
        p.add_argument("--config", default=None, help="key=value file supplying defaults")

    common(sub.add_parser("report", help="all quantities for one scenario"),
           "s", "d", "r1", "r2", "alpha")
    common(sub.add_parser("sweep", help="grid over (r1, r2) written as CSV"),
           "s", "d", "alpha", "grid_step", "out")
    common(sub.add_parser("verify", help="check closed forms against the oracles"),
           "s", "d", "grid_step", "samples", "seed", "streams")
    return parser


def resolve(args) -> dict:
    """Flags override the config file, which overrides built-in defaults."""
    opts = dict(DEFAULTS)
    if args.config:
        opts.update(read_config(args.config))
    for key, value in vars(args).items():
        if key in TYPES and value is not None:
            opts[key] = value
    return opts


def fmt(x) -> str:
    # shortest repr that round-trips
    return repr(float(x))


# --- report -----------------------------------------------------------------

def scenario(opts) -> dict:
    """Every analytics and risk quantity for a single (s, d, r1, r2, alpha)."""
    report = validate(opts["s"], opts["d"], opts["r1"], opts["r2"], opts["alpha"])
    report.raise_if_invalid()
    params = ModelParams(opts["s"], opts["d"])
    div = Diversification(opts["r1"], opts["r2"])
    alpha = ConfidenceLevel(opts["alpha"])
    params.require_deep_support("the joint and aggregate default formulas")
    cov = analytics.covariance_matrix(params, div)
    region = analytics.benefit_region(params)
    var_1 = risk.var_individual(params, div.r1, alpha)
    var_2 = risk.var_individual(params, div.r2, alpha)
    var_sys = risk.var_systemic(params, div, alpha)
    return {
        "s": params.s, "d": params.d, "r1": div.r1, "r2": div.r2, "alpha": alpha.alpha,
        "deep_support": params.deep_support,
        "p_ind_1": analytics.individual_default_prob(params, div.r1),
        "p_ind_2": analytics.individual_default_prob(params, div.r2),
        "p_undiversified": params.d / params.s,
        "p_joint": analytics.joint_default_prob(params, div),
        "p_aggregate": analytics.aggregate_default_prob(params, div),
        "benefit_region": (region.lower, region.upper),
        "w": cov.w, "cov": cov.cov, "var_nu1": cov.var1, "var_nu2": cov.var2, "var_sum": cov.var_sum,
        "var_1": var_1.value, "var_1_piece": var_1.case_tag,
        "var_2": var_2.value, "var_2_piece": var_2.case_tag,
        "var_undiversified": risk.var_individual(params, 0.0, alpha).value,
        "var_sys": var_sys.value, "var_sys_piece": var_sys.case_tag,
        "es_1": risk.expected_shortfall(params, div.r1, alpha).value,
        "es_2": risk.expected_shortfall(params, div.r2, alpha).value,
        "es_sys": risk.es_systemic(params, div, alpha).value,
        "comparison_1": risk.var_comparison(params, div.r1, alpha).ordering,
        "comparison_2": risk.var_comparison(params, div.r2, alpha).ordering,
    }


def cmd_report(opts, out) -> int:
    values = scenario(opts)
    width = max(len(k) for k in values)
    for key, value in values.items():
        if isinstance(value, float):
            value = fmt(value)
        elif isinstance(value, tuple):
            value = "(" + ", ".join(fmt(v) for v in value) + ")"
        print(f"{key:<{width}}  {value}", file=out)
    return EXIT_OK


# --- sweep ------------------------------------------------------------------

def sweep_row(params: ModelParams, r1: float, r2: float, alpha: ConfidenceLevel) -> list[str]:
    div = Diversification(r1, r2)
    try:
        params.require_deep_support("joint and aggregate default probabilities")
    except ValidationError as exc:
        return [fmt(r1), fmt(r2)] + [""] * (len(CSV_HEADER) - 3) + [str(exc)]
    cov = analytics.covariance_matrix(params, div)
    values = [
        analytics.individual_default_prob(params, r1),
        analytics.individual_default_prob(params, r2),
        analytics.joint_default_prob(params, div),
        analytics.aggregate_default_prob(params, div),
        cov.w, cov.cov,
        risk.var_individual(params, r1, alpha).value,
        risk.var_individual(params, r2, alpha).value,
        risk.var_systemic(params, div, alpha).value,
        risk.expected_shortfall(params, r1, alpha).value,
        risk.expected_shortfall(params, r2, alpha).value,
    ]
    return [fmt(r1), fmt(r2)] + [fmt(v) for v in values] + [""]


def sweep_csv(opts) -> str:
    report = validate(opts["s"], opts["d"], 0.0, 0.0, opts["alpha"])
    report.raise_if_invalid()
    params = ModelParams(opts["s"], opts["d"])
    alpha = ConfidenceLevel(opts["alpha"])
    grid = [float(g) for g in unit_grid(opts["grid_step"])]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r1 in grid:
        for r2 in grid:
            writer.writerow(sweep_row(params, r1, r2, alpha))
    return buf.getvalue()


def cmd_sweep(opts, out) -> int:
    text = sweep_csv(opts)
    if opts["out"] in (None, "-"):
        out.write(text)
        return EXIT_OK
    try:
        with open(opts["out"], "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigError(f"cannot write {opts['out']}: {exc}") from exc
    rows = text.count("\n") - 1
    print(f"wrote {rows} rows to {opts['out']}", file=sys.stderr)
    return EXIT_OK


# --- verify -----------------------------------------------------------------

def cmd_verify(opts, out, explicit=()) -> int:
    cfg = VerifyConfig(samples=opts["samples"], seed=opts["seed"], streams=opts["streams"],
                       grid_step=opts["grid_step"])
    if "s" in explicit:
        cfg.s = opts["s"]
    if "d" in explicit:
        cfg.ds = (opts["d"],)
    for d in cfg.ds:
        ModelParams(cfg.s, d).require_deep_support("verify")
    try:
        result = run_all(cfg)
    except QuantileGuardError as exc:
        print(f"guard violation: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    width = max(len(c.name) for c in result.checks)
    for chk in result.checks:
        status = "INFO" if chk.informational else ("PASS" if chk.passed else "FAIL")
        print(f"{status:<4}  {chk.name:<{width}}  {chk.seconds:6.2f}s  {chk.detail}", file=out)
    failed = sum(not c.passed for c in result.checks)
    print(f"{len(result.checks) - failed}/{len(result.checks)} checks passed", file=out)
    return EXIT_OK if result.passed else EXIT_VERIFY


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        opts = resolve(args)
        if args.command == "report":
            return cmd_report(opts, out)
        if args.command == "sweep":
            return cmd_sweep(opts, out)
        explicit = {k for k, v in vars(args).items() if v is not None}
        if args.config:
            explicit |= set(read_config(args.config))
        return cmd_verify(opts, out, explicit)
    except (ConfigError, ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
