"""Command line entry point: ``patterned-rmt <subcommand> ...``.

Settings resolve in the order built-in defaults < ``--config FILE`` (a JSON
object keyed by option name, dashes or underscores) < explicit flags.  Every
JSON output embeds the resolved settings under ``"config"``; CSV sweeps carry
them on a leading ``#`` comment line.

Exit status: 0 ok, 1 invalid input, 2 budget exceeded, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .ensemble import (ORACLE_BUDGET, empirical_moment, exact_moment_oracle,
                       spectrum, write_spectrum_csv)
from .errors import BudgetExceededError, NumericalError, ValidationError
from .freeness import freeness_sweep, load_spec, sweep_csv
from .integrator import GRID_BUDGET, theory_moment_grid, theory_moment_mc
from .paths import DEFAULT_MAX_LENGTH, enumerate_shapes, naive_paths
from .pattern import activation_mask, area_mc, load_pattern
from .words import is_even_balanced, parse_word, star_balance

THREADS_ENV = "PATTERNED_RMT_THREADS"

DEFAULTS = {
    "dist": "gaussian-real",
    "seed": 0,
    "format": None,
    "out": None,
    "threads": None,
    "word_cap": DEFAULT_MAX_LENGTH,
    "oracle_budget": ORACLE_BUDGET,
    "grid_budget": GRID_BUDGET,
    "supersample": 1,
    "samples": 100_000,
    "trials": 10,
    "size": None,
    "sizes": None,
    "grid": None,
    "colors": None,
    "dump": False,
    "pattern": None,
    "word": None,
    "spec": None,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _sizes(text):
    try:
        return [int(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad size list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="JSON file with default option values")
    common.add_argument("--seed", type=int)
    common.add_argument("--dist", choices=["gaussian-real", "gaussian-complex",
                                           "rademacher", "fourth-root"])
    common.add_argument("--format", choices=["json", "csv"])
    common.add_argument("--out", help="write the result here instead of stdout")
    common.add_argument("--threads", type=int, help=f"worker cap (default ${THREADS_ENV})")
    common.add_argument("--word-cap", type=int, dest="word_cap")
    common.add_argument("--oracle-budget", type=int, dest="oracle_budget")
    common.add_argument("--grid-budget", type=int, dest="grid_budget")
    common.add_argument("--supersample", type=int)

    parser = _Parser(prog="patterned-rmt", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_text, *options):
        p = sub.add_parser(name, help=help_text, parents=[common],
                           argument_default=argparse.SUPPRESS)
        for opt in options:
            opt(p)
        return p

    pattern = lambda p: p.add_argument("--pattern", action="append",
                                       help="pattern file or preset; repeat per letter")
    word = lambda p: p.add_argument("--word")
    size = lambda p: p.add_argument("--size", type=int)
    trials = lambda p: p.add_argument("--trials", type=int)
    samples = lambda p: p.add_argument("--samples", type=int)
    grid = lambda p: p.add_argument("--grid", type=int)

    add("pattern-check", "area and activation summary of a pattern", pattern, size, samples)
    add("paths", "count canonical constraint path shapes of a word", word,
        lambda p: p.add_argument("--colors", type=int),
        lambda p: p.add_argument("--dump", action="store_true"))
    add("theory", "limiting moment by Monte Carlo or grid quadrature",
        pattern, word, samples, grid)
    add("simulate", "empirical moment of sampled approximating matrices",
        pattern, word, size, trials)
    add("oracle", "exact expected moment at a small size", pattern, word, size)
    add("compare", "theory and simulation side by side", pattern, word, size,
        trials, samples, grid)
    add("spectrum", "eigenvalues of one sampled matrix", pattern, size)
    add("freeness", "centered alternating product sweep",
        lambda p: p.add_argument("--spec"),
        lambda p: p.add_argument("--sizes", type=_sizes), trials)
    return parser


def resolve(argv=None) -> dict:
    ns = vars(build_parser().parse_args(argv))
    config = dict(DEFAULTS)
    env_threads = os.environ.get(THREADS_ENV)
    if env_threads:
        config["threads"] = int(env_threads)
    if "config" in ns:
        try:
            with open(ns["config"], encoding="utf-8") as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config file: {exc}") from None
        if not isinstance(loaded, dict):
            raise ValidationError("config file must hold a JSON object")
        for key, value in loaded.items():
            key = key.replace("-", "_")
            if key not in DEFAULTS:
                raise ValidationError(f"unknown config key {key!r}")
            config[key] = value
    config.update({k: v for k, v in ns.items() if k != "config"})
    if isinstance(config["pattern"], str):
        config["pattern"] = [config["pattern"]]
    if config["format"] is None:
        config["format"] = "csv" if config["command"] == "freeness" else "json"
    if isinstance(config["sizes"], str):
        config["sizes"] = _sizes(config["sizes"])
    return config


def _need(config, *keys):
    for key in keys:
        if config.get(key) in (None, []):
            raise ValidationError(f"{config['command']} needs --{key.replace('_', '-')}")


def _patterns(config):
    _need(config, "pattern")
    return [load_pattern(p) for p in config["pattern"]]


def _word(config):
    _need(config, "word")
    return parse_word(config["word"])


def _emit(config, payload) -> str:
    payload = dict(payload, config=config)
    return json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _theory(config, pats, w):
    if config.get("grid"):
        return theory_moment_grid(pats, w, config["grid"], budget=config["grid_budget"],
                                  max_length=config["word_cap"])
    return theory_moment_mc(pats, w, config["samples"], config["seed"],
                            max_length=config["word_cap"], threads=config["threads"])


def _empirical(config, pats, w):
    _need(config, "size")
    return empirical_moment(pats, w, config["size"], config["trials"], config["dist"],
                            config["seed"], threads=config["threads"],
                            supersample=config["supersample"])


def run(config: dict) -> str:
    """Execute one resolved configuration and return the text to output."""
    cmd = config["command"]
    if cmd == "pattern-check":
        pats = _patterns(config)
        out = {"patterns": []}
        for name, p in zip(config["pattern"], pats):
            entry = {"source": name, "area": area_mc(p, config["samples"], config["seed"]).to_dict()}
            if config.get("size"):
                mask = activation_mask(p, config["size"], config["supersample"])
                entry["active_cells"] = int(mask.sum())
            out["patterns"].append(entry)
        return _emit(config, out)

    if cmd == "paths":
        w = _word(config)
        shapes = enumerate_shapes(w, config["word_cap"])
        out = {"word": config["word"], "length": len(w), "shapes": len(shapes),
               "even_balanced": is_even_balanced(w),
               "star_balance": {w.names[k]: list(v) for k, v in star_balance(w).items()}}
        if config.get("colors"):
            found = naive_paths(w, config["colors"], config["oracle_budget"])
            out["constraint_paths"] = sum(c.constraint for _, c in found)
        if config.get("dump"):
            out["shape_paths"] = [",".join(map(str, s.path)) for s in shapes]
        return _emit(config, out)

    if cmd == "theory":
        return _emit(config, _theory(config, _patterns(config), _word(config)).to_dict())

    if cmd == "simulate":
        return _emit(config, _empirical(config, _patterns(config), _word(config)).to_dict())

    if cmd == "oracle":
        _need(config, "size")
        value = exact_moment_oracle(_patterns(config), _word(config), config["size"],
                                    config["dist"], budget=config["oracle_budget"])
        return _emit(config, {"value": value, "stderr": 0.0, "samples": 0, "method": "oracle"})

    if cmd == "compare":
        pats, w = _patterns(config), _word(config)
        theory = _theory(config, pats, w)
        emp = _empirical(config, pats, w)
        spread = math.hypot(theory.stderr, emp.stderr)
        diff = emp.value - theory.value
        z = diff / spread if spread > 0 else (0.0 if diff == 0 else None)
        return _emit(config, {"theory": theory.to_dict(), "empirical": emp.to_dict(),
                              "difference": diff, "z": z})

    if cmd == "spectrum":
        _need(config, "size", "out")
        pats = _patterns(config)
        eigs = spectrum(pats[0], config["size"], config["dist"], config["seed"])
        if not np.all(np.isfinite(eigs)):
            raise NumericalError("eigensolver returned non-finite values")
        write_spectrum_csv(eigs, config["out"])
        total = complex(eigs.sum())
        return _emit(config, {"eigenvalues": len(eigs), "csv": config["out"],
                              "eigenvalue_sum": [total.real, total.imag]})

    if cmd == "freeness":
        _need(config, "spec")
        spec = load_spec(config["spec"], sizes=tuple(config["sizes"]) if config["sizes"] else None,
                         trials=config.get("trials"), dist=config["dist"], seed=config["seed"])
        rows = freeness_sweep(spec)
        if config["format"] == "json":
            return _emit(config, {"rows": [{"N": n, "estimate": v, "stderr": s}
                                           for n, v, s in rows]})
        header = "# " + json.dumps({"config": config}, sort_keys=True) + "\n"
        return header + sweep_csv(rows)

    raise ValidationError(f"unknown command {cmd!r}")


def main(argv=None) -> int:
    try:
        try:
            config = resolve(argv)
        except SystemExit as exc:  # argparse: --help, --version, usage errors
            return exc.code if isinstance(exc.code, int) else 1
        text = run(config)
        if config.get("out") and config["command"] != "spectrum":
            with open(config["out"], "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return 0
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except BudgetExceededError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
