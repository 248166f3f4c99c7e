"""Command-line interface.

Subcommands::

    coupledosc entangle --s1 1 --s2 1 --r-grid 0:1:101
    coupledosc evolve --s1 2 --s2 0 --omega1 1 --omega2 1.0005 --k3 1e-3 --t-grid 0:6000:61
    coupledosc figure2 --out figdir
    coupledosc verify --appendix --out report.json

Options may also come from a flat ``key = value`` file given with
``--config``; command-line flags take precedence. Exit codes: 0 success,
1 verification failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import xlogy

from . import entanglement as ent
from . import verification
from .dynamics import MAX_EXCITATIONS, InitialState, amplitudes, schmidt_modes
from .model import PhysicalParams, evolution_point, rabi_params, reduce_physical

DEFAULT_PAIRS = ((0, 1), (1, 1), (0, 2), (2, 2), (1, 9), (5, 5))
FIGURE2_POINTS = 1001
DEFAULT_R_POINTS = 101
PHYSICAL_KEYS = ("m1", "m2", "omega1", "omega2", "k1", "k2", "k3", "k4", "hbar")


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class RunConfig:
    command: str
    s1: int = 1
    s2: int = 1
    epsilon: float = 0.0
    r_grid: np.ndarray | None = None
    t_grid: np.ndarray | None = None
    physical: PhysicalParams | None = None
    branch: str = "auto"
    fmt: str = "csv"
    out: str | None = None
    tolerances: dict = field(default_factory=dict)
    appendix: bool = False
    workers: int = 1
    pairs: tuple = DEFAULT_PAIRS
    perturb: float = 0.0


# -- parsing helpers ---------------------------------------------------------

def parse_grid(text: str, name: str) -> np.ndarray:
    """``a:b:n`` (inclusive, n points) or a comma-separated list of values."""
    try:
        if ":" in text:
            a, b, n = text.split(":")
            n = int(n)
            if n < 1:
                raise ConfigError(name, f"need at least one point, got n={n}")
            grid = np.linspace(float(a), float(b), n)
        else:
            grid = np.array([float(v) for v in text.split(",") if v.strip()])
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(name, f"cannot parse grid {text!r} ({exc})") from None
    if grid.size == 0:
        raise ConfigError(name, "grid is empty")
    if not np.all(np.isfinite(grid)):
        raise ConfigError(name, "grid values must be finite")
    if grid.size > 1 and not np.all(np.diff(grid) > 0):
        raise ConfigError(name, "grid must be strictly increasing")
    return grid


def parse_pairs(items, name: str = "pairs") -> tuple:
    if isinstance(items, str):
        items = items.split()
    pairs = []
    for item in items:
        try:
            a, b = item.split(",")
            pairs.append((int(a), int(b)))
        except ValueError:
            raise ConfigError(name, f"expected s1,s2 but got {item!r}") from None
    if not pairs:
        raise ConfigError(name, "no state pairs given")
    return tuple(pairs)


def parse_tolerances(items, name: str = "tol") -> dict:
    if isinstance(items, str):
        items = [t for t in items.replace(",", " ").split() if t]
    out = {}
    for item in items:
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(name, f"expected NAME=VALUE but got {item!r}")
        if key not in verification.DEFAULT_TOLERANCES:
            raise ConfigError(name, f"unknown tolerance {key!r}")
        try:
            out[key] = float(value)
        except ValueError:
            raise ConfigError(name, f"tolerance {key} is not a number: {value!r}") from None
    return out


def read_config_file(path: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment; keys use ``_`` or ``-``."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path!r}: {exc.strerror}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError("config", f"{path}:{lineno}: expected key = value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _as_bool(value, name):
    if isinstance(value, bool):
        return value
    v = str(value).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(name, f"expected a boolean, got {value!r}")


def _as_number(value, name, kind=float):
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(name, f"expected {kind.__name__}, got {value!r}") from None


# -- configuration -----------------------------------------------------------

_FILE_KEYS = {"s1", "s2", "epsilon", "r_grid", "t_grid", "branch", "format", "out", "tol",
              "appendix", "workers", "pairs", "perturb", *PHYSICAL_KEYS}


def build_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    if args.config:
        values = read_config_file(args.config)
        unknown = set(values) - _FILE_KEYS
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown key in config file")
    tol = parse_tolerances(values.pop("tol", ""))
    for key in _FILE_KEYS - {"tol"}:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    if args.tol:
        tol.update(parse_tolerances(args.tol))

    cfg = RunConfig(command=args.command, tolerances=tol)
    cfg.s1 = _as_number(values.get("s1", 1), "s1", int)
    cfg.s2 = _as_number(values.get("s2", 1), "s2", int)
    for name in ("s1", "s2"):
        if getattr(cfg, name) < 0:
            raise ConfigError(name, "must be a nonnegative integer")
    if cfg.s1 + cfg.s2 > MAX_EXCITATIONS:
        raise ConfigError("s2", f"s1 + s2 must not exceed {MAX_EXCITATIONS}")
    cfg.epsilon = _as_number(values.get("epsilon", 0.0), "epsilon")
    if not math.isfinite(cfg.epsilon):
        raise ConfigError("epsilon", "must be finite")
    cfg.branch = str(values.get("branch", "auto"))
    if cfg.branch not in ("+", "-", "auto"):
        raise ConfigError("branch", f"must be one of +, -, auto; got {cfg.branch!r}")
    cfg.fmt = str(values.get("format", "json" if cfg.command == "verify" else "csv"))
    if cfg.fmt not in ("csv", "json"):
        raise ConfigError("format", f"must be csv or json; got {cfg.fmt!r}")
    cfg.out = values.get("out")
    cfg.appendix = _as_bool(values.get("appendix", False), "appendix")
    cfg.workers = _as_number(values.get("workers", 1), "workers", int)
    if cfg.workers < 1:
        raise ConfigError("workers", "must be at least 1")
    cfg.perturb = _as_number(values.get("perturb", 0.0), "perturb")
    if "pairs" in values:
        cfg.pairs = parse_pairs(values["pairs"])
    for s1, s2 in cfg.pairs:
        try:
            InitialState(s1, s2)
        except ValueError as exc:
            raise ConfigError("pairs", str(exc)) from None

    r_grid = values.get("r_grid")
    t_grid = values.get("t_grid")
    if r_grid is not None and t_grid is not None:
        raise ConfigError("r_grid", "give exactly one sweep mode (--r-grid or --t-grid)")
    if r_grid is not None:
        cfg.r_grid = parse_grid(r_grid, "r_grid")
    if t_grid is not None:
        cfg.t_grid = parse_grid(t_grid, "t_grid")

    phys = {k: values[k] for k in PHYSICAL_KEYS if values.get(k) is not None}
    if phys:
        for k in ("omega1", "omega2"):
            if k not in phys:
                raise ConfigError(k, "required when physical parameters are given")
        kw = {k: _as_number(v, k) for k, v in phys.items()}
        kw.setdefault("m1", 1.0)
        kw.setdefault("m2", 1.0)
        try:
            cfg.physical = PhysicalParams(**kw)
        except ValueError as exc:
            raise ConfigError(str(exc).split(" ", 1)[0], str(exc)) from None
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if cfg.command == "entangle":
        if cfg.t_grid is not None:
            raise ConfigError("t_grid", "entangle sweeps R; use --r-grid")
        R_max = 1.0 / (1.0 + cfg.epsilon ** 2)
        if cfg.r_grid is None:
            cfg.r_grid = np.linspace(0.0, R_max, DEFAULT_R_POINTS)
        if cfg.r_grid[0] < 0.0 or cfg.r_grid[-1] > R_max * (1.0 + 1e-12):
            raise ConfigError("r_grid", f"values must lie in [0, 1/(1+eps^2)] = [0, {R_max!r}]")
    elif cfg.command == "evolve":
        if cfg.r_grid is not None:
            raise ConfigError("r_grid", "evolve sweeps time; use --t-grid")
        if cfg.t_grid is None:
            raise ConfigError("t_grid", "evolve needs --t-grid a:b:n")
        if cfg.physical is None:
            raise ConfigError("omega1", "evolve needs physical parameters (--omega1, --omega2, couplings)")


# -- formatting --------------------------------------------------------------

def fmt_number(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def _json_value(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if x is None:
        return "null"
    if isinstance(x, str):
        return json.dumps(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return fmt_number(x) if math.isfinite(x) else "null"
    if isinstance(x, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json_value(v)}" for k, v in x.items()) + "}"
    if isinstance(x, (list, tuple)):
        return "[" + ", ".join(_json_value(v) for v in x) + "]"
    raise TypeError(f"cannot serialize {type(x).__name__}")


def to_json(obj) -> str:
    """JSON text with floats at 17 significant digits; top-level lists one item per line."""
    if isinstance(obj, dict):
        body = ",\n".join(f"  {json.dumps(str(k))}: {_json_value(v)}" for k, v in obj.items())
        return "{\n" + body + "\n}\n"
    return _json_value(obj) + "\n"


def render_table(columns, rows, fmt: str) -> str:
    if fmt == "json":
        return to_json({"columns": list(columns), "rows": [list(r) for r in rows]})
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt_number(v) for v in r])
    return buf.getvalue()


def emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


# -- commands ----------------------------------------------------------------

def _branch(cfg: RunConfig):
    return {"+": 1, "-": -1, "auto": None}[cfg.branch]


def _entangle_chunk(task):
    s1, s2, R, eps, branch = task
    lam = ent.spectrum_grid(s1, s2, R, eps, branch)
    return lam


def _chunked_spectra(s1, s2, R, eps, branch, workers):
    if workers <= 1 or R.size < 2 * workers:
        return _entangle_chunk((s1, s2, R, eps, branch))
    chunks = np.array_split(R, workers)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_entangle_chunk, [(s1, s2, c, eps, branch) for c in chunks]))
    return np.vstack(parts)


def _measures(lam: np.ndarray):
    return ent.von_neumann(lam), ent.schmidt_number(lam)


def cmd_entangle(cfg: RunConfig):
    b = _branch(cfg) or 1
    lam = _chunked_spectra(cfg.s1, cfg.s2, cfg.r_grid, cfg.epsilon, b, cfg.workers)
    N = cfg.s1 + cfg.s2
    columns = ["R", "S_N", "K"] + [f"lambda_{n}" for n in range(N + 1)]
    rows = []
    for R, row in zip(cfg.r_grid, lam):
        S, K = _measures(row)
        rows.append([float(R), S, K, *row.tolist()])
    return columns, rows


def cmd_evolve(cfg: RunConfig):
    c = reduce_physical(cfg.physical)
    r = rabi_params(c, cfg.physical.omega1, cfg.physical.omega2)
    if r.degenerate:
        warnings.warn("couplings cancel (Omega = 0): every row is the initial product state")
    st = InitialState(cfg.s1, cfg.s2)
    rows = []
    for t in cfg.t_grid:
        e = evolution_point(r, float(t), _branch(cfg))
        lam = schmidt_modes(amplitudes(st, e)).lam
        S, K = _measures(lam)
        rows.append([float(t), e.R, S, K])
    return ["t", "R", "S_N", "K"], rows


def figure2_tables(pairs=DEFAULT_PAIRS, n_points: int = FIGURE2_POINTS, workers: int = 1) -> dict:
    """Four tables keyed by file name: S_N and K curves, pairs split into two panels."""
    R = np.linspace(0.0, 1.0, n_points)
    half = (len(pairs) + 1) // 2
    panels = (pairs[:half], pairs[half:]) if len(pairs) > 1 else (pairs, ())
    S, K = {}, {}
    for s1, s2 in pairs:
        lam = _chunked_spectra(s1, s2, R, 0.0, 1, workers)
        S[(s1, s2)] = 0.0 - np.sum(xlogy(lam, lam), axis=1)
        K[(s1, s2)] = 1.0 / np.sum(lam * lam, axis=1)
    out = {}
    for label, measure, data, panel in (("a", "S_N", S, panels[0]), ("b", "S_N", S, panels[1]),
                                        ("c", "K", K, panels[0]), ("d", "K", K, panels[1])):
        columns = ["R"] + [f"{measure}_{s1}_{s2}" for s1, s2 in panel]
        rows = [[float(R[i])] + [float(data[p][i]) for p in panel] for i in range(R.size)]
        out[f"figure2_{label}_{measure}.csv"] = (columns, rows)
    return out


def cmd_figure2(cfg: RunConfig) -> list:
    outdir = cfg.out or "."
    os.makedirs(outdir, exist_ok=True)
    written = []
    for name, (columns, rows) in figure2_tables(cfg.pairs, workers=cfg.workers).items():
        path = os.path.join(outdir, name)
        emit(render_table(columns, rows, "csv"), path)
        written.append(path)
    return written


def cmd_verify(cfg: RunConfig):
    checks = verification.run_verification(cfg.tolerances, appendix=cfg.appendix,
                                           perturb=cfg.perturb, workers=cfg.workers)
    ok = verification.all_passed(checks)
    if cfg.fmt == "csv":
        columns = ["name", "error", "bound", "comparison", "passed", "kind"]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for c in checks:
            w.writerow([c.name, fmt_number(c.error), fmt_number(c.bound), c.comparison,
                        "true" if c.passed else "false", c.kind])
        text = buf.getvalue()
    else:
        text = to_json({"passed": ok, "checks": [c.to_dict() for c in checks]})
    return ok, text


# -- entry point -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value file; flags override it")
    common.add_argument("--s1", type=int)
    common.add_argument("--s2", type=int)
    common.add_argument("--epsilon", type=float, help="detuning in units of Omega")
    common.add_argument("--r-grid", dest="r_grid", metavar="A:B:N")
    common.add_argument("--t-grid", dest="t_grid", metavar="A:B:N")
    common.add_argument("--branch", choices=["+", "-", "auto"],
                        help="sign of sin(phi); auto follows sin(Omega t sqrt(1+eps^2))")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--out", metavar="PATH")
    common.add_argument("--tol", action="append", metavar="NAME=VALUE")
    common.add_argument("--appendix", action="store_true", default=None)
    common.add_argument("--workers", type=int)
    common.add_argument("--pairs", nargs="+", metavar="S1,S2")
    common.add_argument("--perturb", type=float, help=argparse.SUPPRESS)
    for key in PHYSICAL_KEYS:
        common.add_argument(f"--{key}", type=float)

    p = argparse.ArgumentParser(prog="coupledosc",
                                description="Entanglement of two linearly coupled oscillators.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("entangle", parents=[common], help="S_N, K and Schmidt modes on an R grid")
    sub.add_parser("evolve", parents=[common], help="time evolution from physical parameters")
    sub.add_parser("figure2", parents=[common], help="entanglement curves for a list of states")
    sub.add_parser("verify", parents=[common], help="run invariant and oracle checks")
    return p


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"coupledosc: warning: {message}", file=sys.stderr)


def _run(cfg: RunConfig) -> int:
    if cfg.command == "entangle":
        emit(render_table(*cmd_entangle(cfg), cfg.fmt), cfg.out)
    elif cfg.command == "evolve":
        emit(render_table(*cmd_evolve(cfg), cfg.fmt), cfg.out)
    elif cfg.command == "figure2":
        for path in cmd_figure2(cfg):
            print(path, file=sys.stderr)
    else:
        ok, text = cmd_verify(cfg)
        emit(text, cfg.out)
        return 0 if ok else 1
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    with warnings.catch_warnings():
        warnings.simplefilter("always")
        warnings.showwarning = _show_warning
        try:
            return _run(build_config(args))
        except ConfigError as exc:
            print(f"coupledosc: error: {exc}", file=sys.stderr)
            return 2


if __name__ == "__main__":
    sys.exit(main())
