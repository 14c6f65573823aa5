"""Command-line front end.

Subcommands ``evolve``, ``branch``, ``compare`` and ``end-to-end`` write CSV
and/or JSON files (and optional SVG charts) into ``--out``.  Settings may come
from a ``key = value`` config file given with ``--config``; flags on the
command line override it.

Exit codes: 0 success, 2 configuration error, 3 solver error, 4 self-check
failure.
"""
from __future__ import annotations

import argparse
import math
import sys
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional

from . import svg
from .analysis import born_convergence, compare_narratives, end_to_end
from .branching import BranchConfig, closed_form, enumerate_tree, peak
from .dynamics import SgParams, diagnostics, evolve_series, init_packet
from .errors import (
    BoundaryError,
    CapacityError,
    DomainError,
    ResolutionError,
    SelfCheckError,
    UnsupportedModeError,
)
from .output import write_csv, write_json, write_text
from .spin import exact_born_weight_degrees, make_skew_state

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_SELFCHECK = 0, 2, 3, 4
CLI_Q_TOLERANCE = 1e-4


class ConfigError(ValueError):
    pass


def parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"not a rational number: {text!r}") from exc


def _int(text) -> int:
    try:
        return int(str(text).strip())
    except ValueError as exc:
        raise ConfigError(f"not an integer: {text!r}") from exc


def _float(text) -> float:
    try:
        x = float(str(text).strip())
    except ValueError as exc:
        raise ConfigError(f"not a number: {text!r}") from exc
    if not math.isfinite(x):
        raise ConfigError(f"not a finite number: {text!r}")
    return x


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _choice(*options: str) -> Callable[[str], str]:
    def conv(text) -> str:
        v = str(text).strip()
        if v not in options:
            raise ConfigError(f"expected one of {', '.join(options)}, got {v!r}")
        return v

    return conv


SG_KEYS = {
    "mass": _float,
    "coupling": _float,
    "b0": _float,
    "gradient": _float,
    "length": _float,
    "points": _int,
    "dt": _float,
    "t_final": _float,
    "sigma0": _float,
}
COMMON_KEYS = {"out": str, "format": _choice("csv", "json", "both"), "svg": _bool, "seed": _int}
THETA_KEYS = {"theta_degrees": parse_fraction, "theta_radians": _float}

KEYS = {
    "evolve": {**COMMON_KEYS, **THETA_KEYS, **SG_KEYS, "record_every": _int},
    "branch": {
        **COMMON_KEYS,
        **THETA_KEYS,
        "N": _int,
        "mode": _choice("naive", "weighted"),
        "q": parse_fraction,
        "enumerate": _bool,
    },
    "compare": {**COMMON_KEYS, **THETA_KEYS, "N": _int, "samples": _int},
    "end-to-end": {**COMMON_KEYS, **THETA_KEYS, **SG_KEYS, "N": _int, "samples": _int},
}

# Mutually exclusive ways to set the spin; one given as a flag masks the others from the config.
ALTERNATIVES = {"theta_degrees", "theta_radians", "q"}

DEFAULTS = {
    "out": ".",
    "format": "both",
    "svg": False,
    "seed": 0,
    "record_every": 100,
    "N": 10,
    "mode": "weighted",
    "enumerate": False,
    "sigma0": 0.5,
}


def read_config(path: str) -> dict:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        out[key.replace("-", "_")] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sgbranch", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS

    def common(p):
        p.add_argument("--config", default=S, help="key = value settings file")
        p.add_argument("--out", default=S, help="output directory (default: .)")
        p.add_argument("--format", default=S, choices=["csv", "json", "both"])
        p.add_argument("--svg", action="store_true", default=S, help="also write SVG charts")
        p.add_argument("--seed", type=int, default=S)
        p.add_argument("--theta-deg", dest="theta_degrees", type=parse_fraction, default=S)
        p.add_argument("--theta-rad", dest="theta_radians", type=float, default=S)

    def sg(p):
        for name in ("mass", "coupling", "b0", "gradient", "length", "dt", "sigma0"):
            p.add_argument(f"--{name.replace('_', '-')}", dest=name, type=float, default=S)
        p.add_argument("--t-final", dest="t_final", type=float, default=S)
        p.add_argument("--points", type=int, default=S)

    p = sub.add_parser("evolve", help="propagate the wavepacket and write its split diagnostics")
    common(p)
    sg(p)
    p.add_argument("--record-every", dest="record_every", type=int, default=S, help="steps between rows")

    p = sub.add_parser("branch", help="tabulate history multiplicities N(p)")
    common(p)
    p.add_argument("--N", type=int, default=S, help="number of runs")
    p.add_argument("--mode", choices=["naive", "weighted"], default=S)
    p.add_argument("--q", type=parse_fraction, default=S, help="Born weight, e.g. 3/4")
    p.add_argument("--enumerate", action="store_true", default=S, help="walk all 2^N histories")

    p = sub.add_parser("compare", help="naive versus weighted branching against the Born rule")
    common(p)
    p.add_argument("--N", type=int, default=S)
    p.add_argument("--samples", type=int, default=S, help="Monte-Carlo histories (optional)")

    p = sub.add_parser("end-to-end", help="simulate, extract q, then branch")
    common(p)
    sg(p)
    p.add_argument("--N", type=int, default=S)
    p.add_argument("--samples", type=int, default=S)
    return parser


def resolve(command: str, flags: dict) -> dict:
    """Merge defaults, config file and flags (in rising priority) and convert types."""
    allowed = KEYS[command]
    settings = {k: v for k, v in DEFAULTS.items() if k in allowed}
    config_path = flags.pop("config", None)
    if config_path is not None:
        for key, value in read_config(config_path).items():
            if key not in allowed:
                raise ConfigError(f"unknown key {key!r} for command {command}")
            settings[key] = allowed[key](value)
    if ALTERNATIVES & flags.keys():
        for key in ALTERNATIVES - flags.keys():
            settings.pop(key, None)
    settings.update(flags)
    if "theta_degrees" in settings and "theta_radians" in settings:
        raise ConfigError("give only one of theta_degrees and theta_radians")
    return settings


def theta_of(settings: dict, default_degrees: Optional[int] = 90):
    """Return ``(theta_radians, exact_q_or_None)``."""
    if "theta_radians" in settings:
        return float(settings["theta_radians"]), None
    deg = settings.get("theta_degrees")
    if deg is None:
        if default_degrees is None:
            return None, None
        deg = Fraction(default_degrees)
    return math.radians(float(deg)), exact_born_weight_degrees(deg)


def sg_params(settings: dict) -> SgParams:
    fields = {k: settings[k] for k in SG_KEYS if k in settings and k != "sigma0"}
    return SgParams(**fields)


def _want(settings: dict, kind: str) -> bool:
    return settings["format"] in (kind, "both")


def _out_dir(settings: dict) -> Path:
    out = Path(settings["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_evolve(settings: dict) -> list[Path]:
    theta, _ = theta_of(settings)
    params = sg_params(settings)
    sigma0 = settings["sigma0"]
    params.check_stability(sigma0)
    state = init_packet(make_skew_state(theta), sigma0, params)
    states = evolve_series(state, params, params.t_final, settings["record_every"])
    rows = []
    for s in states:
        d = diagnostics(s)
        rows.append((s.t, d.mean_y_plus, d.mean_y_minus, d.pop_plus, d.pop_minus, d.spatial_overlap, s.norm()))
    out = _out_dir(settings)
    written = []
    header = ["t", "mean_y_plus", "mean_y_minus", "pop_plus", "pop_minus", "overlap", "norm"]
    if _want(settings, "csv"):
        written.append(write_csv(out / "evolve.csv", header, rows))
    if _want(settings, "json"):
        final = dict(zip(header, rows[-1]))
        summary = {
            "command": "evolve",
            "theta": theta,
            "sigma0": sigma0,
            "params": {k: getattr(params, k) for k in params.__dataclass_fields__},
            "steps": len(rows) - 1,
            "final": final,
            "ehrenfest_displacement": params.displacement(rows[-1][0]),
        }
        written.append(write_json(out / "evolve.json", summary))
    if settings["svg"]:
        ts = [r[0] for r in rows]
        chart = svg.line_chart(
            ts,
            {"<y>+": [r[1] for r in rows], "<y>-": [r[2] for r in rows]},
            "Component mean positions",
            "t",
            "<y>",
        )
        written.append(write_text(out / "evolve.svg", chart))
    return written


def _branch_q(settings: dict):
    if "q" in settings and ("theta_degrees" in settings or "theta_radians" in settings):
        raise ConfigError("give either q or a theta, not both")
    if "q" in settings:
        return settings["q"]
    theta, exact = theta_of(settings, default_degrees=None)
    if theta is None:
        return Fraction(1, 2)
    if exact is not None:
        return exact
    return (1.0 + math.cos(theta)) / 2.0


def cmd_branch(settings: dict) -> list[Path]:
    q = _branch_q(settings)
    if isinstance(q, Fraction):
        config = BranchConfig(settings["N"], mode=settings["mode"], q_exact=q)
    else:
        config = BranchConfig(settings["N"], q, mode=settings["mode"])
    method = "enumerate" if settings["enumerate"] else "closed_form"
    tally = enumerate_tree(config) if settings["enumerate"] else closed_form(config)
    normalized = tally.normalized()
    rows = []
    for p, (c, w) in enumerate(zip(tally.counts, normalized)):
        num, den = (c.numerator, c.denominator) if tally.exact else (None, None)
        rows.append((p, num, den, float(c), float(w)))
    out = _out_dir(settings)
    written = []
    if _want(settings, "csv"):
        header = ["p", "count_exact_num", "count_exact_den", "count_float", "normalized"]
        written.append(write_csv(out / "branch.csv", header, rows))
    total = tally.total
    if _want(settings, "json"):
        summary = {
            "command": "branch",
            "N": config.runs,
            "mode": config.mode.value,
            "method": method,
            "q": config.q,
            "q_exact": _frac(config.q_exact),
            "total": float(total),
            "total_exact": _frac(total) if tally.exact else None,
            "peak": peak(config, tally),
            "born_peak": config.runs * config.q,
        }
        written.append(write_json(out / "branch.json", summary))
    if settings["svg"]:
        chart = svg.bar_chart(
            list(range(config.runs + 1)),
            {f"N(p), {config.mode.value}": [r[3] for r in rows]},
            f"History multiplicities, N={config.runs}",
            "p (number of plus outcomes)",
            "N(p)",
        )
        written.append(write_text(out / "branch.svg", chart))
    return written


def _frac(x) -> Optional[str]:
    if x is None:
        return None
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _write_report(settings: dict, name: str, report) -> list[Path]:
    out = _out_dir(settings)
    written = []
    if _want(settings, "json"):
        written.append(write_json(out / f"{name}.json", {"command": name.replace("_", "-"), **report.to_dict()}))
    if _want(settings, "csv"):
        header = ["p", "weighted", "naive", "empirical"]
        emp = report.empirical or [None] * (report.N + 1)
        rows = [(p, float(w), float(n), e) for p, (w, n, e) in enumerate(zip(report.predicted, report.naive, emp))]
        written.append(write_csv(out / f"{name}.csv", header, rows))
    if settings["svg"]:
        series = {"weighted (Born)": [float(x) for x in report.predicted], "naive (equal count)": [float(x) for x in report.naive]}
        if report.empirical is not None:
            series["sampled"] = report.empirical
        chart = svg.bar_chart(
            list(range(report.N + 1)),
            series,
            f"Plus-count distribution, N={report.N}, q={report.q:.6g}",
            "p (number of plus outcomes)",
            "probability",
        )
        written.append(write_text(out / f"{name}.svg", chart))
    return written


def cmd_compare(settings: dict) -> list[Path]:
    theta, exact = theta_of(settings)
    if "samples" in settings:
        report = born_convergence(theta, settings["N"], settings["samples"], settings["seed"], exact)
    else:
        report = compare_narratives(settings["N"], theta, exact)
    return _write_report(settings, "compare", report)


def cmd_end_to_end(settings: dict) -> list[Path]:
    theta, _ = theta_of(settings)
    params = sg_params(settings)
    try:
        report = end_to_end(
            theta,
            params,
            settings["N"],
            settings.get("samples"),
            settings["seed"],
            sigma0=settings["sigma0"],
            tolerance=CLI_Q_TOLERANCE,
        )
    except SelfCheckError as exc:
        _write_report(settings, "end_to_end", exc.report)
        raise
    return _write_report(settings, "end_to_end", report)


COMMANDS = {
    "evolve": cmd_evolve,
    "branch": cmd_branch,
    "compare": cmd_compare,
    "end-to-end": cmd_end_to_end,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = vars(parser.parse_args(argv))
    command = args.pop("command")
    try:
        settings = resolve(command, args)
        written = COMMANDS[command](settings)
    except (ConfigError, DomainError, CapacityError, UnsupportedModeError) as exc:
        print(f"sgbranch {command}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BoundaryError, ResolutionError) as exc:
        print(f"sgbranch {command}: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except SelfCheckError as exc:
        print(f"sgbranch {command}: self-check failed: {exc}", file=sys.stderr)
        return EXIT_SELFCHECK
    for path in written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
