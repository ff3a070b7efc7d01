"""Command-line harness: sample, law, verify, transform.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 I/O error.
Every run writes its resolved configuration next to its main output as
``<output>.config.json``; ``--config`` replays such a file.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import heavy, laws, suites
from .ensembles import EntryLaw, PHASES, sample_iid_matrix
from .errors import RmtError
from .rng import as_seed, default_seed
from .spectral import eigenvalues, singular_values
from .transforms import log_potential_empirical, quaternionic_lattice, recover_density_from_b

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
ENSEMBLES = ("ginibre-complex", "ginibre-real", "bernoulli", "heavy")
LAWS = ("quarter-circular", "circular-modulus", "circular-modulus-density", "ginibre-mean",
        "kostlan-cdf", "gumbel", "g-alpha", "nu-z")


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def fmt(x) -> str:
    return repr(float(x))


def parse_grid(spec: str) -> np.ndarray:
    try:
        lo, hi, step = (float(v) for v in spec.split(":"))
    except ValueError:
        raise UsageError(f"grid must look like lo:hi:step, got {spec!r}") from None
    if step <= 0 or hi < lo:
        raise UsageError(f"empty grid {spec!r}")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return np.round(lo + step * np.arange(count), 12)


def entry_law(ensemble: str, alpha: float | None, phase: str) -> EntryLaw:
    if ensemble == "ginibre-complex":
        return EntryLaw("complex-gaussian")
    if ensemble == "ginibre-real":
        return EntryLaw("real-gaussian")
    if ensemble == "bernoulli":
        return EntryLaw("symmetric-bernoulli")
    if alpha is None:
        raise UsageError("--alpha is required for the heavy ensemble")
    return EntryLaw("heavy-tailed", alpha, phase)


def natural_scale(ensemble: str, n: int, alpha: float | None) -> float:
    return n ** (-1 / alpha) if ensemble == "heavy" else n ** -0.5


def write_rows(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_json(path: Path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def echo_config(output: Path, config: dict) -> None:
    write_json(Path(str(output) + ".config.json"), config)


# commands -------------------------------------------------------------------

def cmd_sample(cfg: dict) -> int:
    law = entry_law(cfg["ensemble"], cfg["alpha"], cfg["phase"])
    n = cfg["n"]
    m = sample_iid_matrix(n, law, as_seed(cfg["seed"]))
    if cfg["scale"] == "natural":
        m = m * natural_scale(cfg["ensemble"], n, cfg["alpha"])
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    lam = eigenvalues(m)
    write_rows(out / "spectrum.csv", ["re", "im"], ((v.real, v.imag) for v in lam))
    write_rows(out / "singular.csv", ["s"], ((v,) for v in singular_values(m)))
    echo_config(out / "spectrum.csv", cfg)
    return EXIT_OK


def cmd_law(cfg: dict) -> int:
    name = cfg["name"]
    grid = parse_grid(cfg["grid"]) if cfg["grid"] else None
    out = Path(cfg["out"])
    sidecar = None
    if name == "quarter-circular":
        x = parse_grid("0:2:0.01") if grid is None else grid
        rows, header = zip(x, laws.quarter_circular_density(x)), ["x", "density"]
    elif name == "circular-modulus":
        x = parse_grid("0:1.5:0.01") if grid is None else grid
        rows, header = zip(x, laws.circular_modulus_cdf(x)), ["r", "cdf"]
    elif name == "circular-modulus-density":
        x = parse_grid("0:1.5:0.01") if grid is None else grid
        rows, header = zip(x, laws.circular_modulus_density(x)), ["r", "density"]
    elif name == "ginibre-mean":
        x = parse_grid("0:1.5:0.01") if grid is None else grid
        n = cfg["n"]
        rows, header = zip(x, n * laws.ginibre_mean_density(n, math.sqrt(n) * x)), ["r", "density"]
    elif name == "kostlan-cdf":
        x = parse_grid("0.8:1.3:0.01") if grid is None else grid
        rows, header = zip(x, laws.kostlan_radius_cdf(cfg["n"], x)), ["r", "cdf"]
    elif name == "gumbel":
        x = parse_grid("-3:6:0.05") if grid is None else grid
        rows, header = zip(x, laws.gumbel_cdf(x)), ["x", "cdf"]
    elif name == "g-alpha":
        if cfg["alpha"] is None:
            raise UsageError("--alpha is required for g-alpha")
        x = parse_grid("0:4:0.05") if grid is None else grid
        bank = heavy.make_bank(cfg["alpha"], cfg["bank_size"], as_seed(cfg["seed"]))
        values = [heavy.heavy_density_g(r, cfg["alpha"], bank) for r in x]
        norm = heavy.g_alpha_normalization(cfg["alpha"], bank)
        residuals = [heavy.rde_y(r, 0.0, cfg["alpha"], bank).residual for r in x]
        rows, header = zip(x, values), ["r", "g_alpha"]
        sidecar = {"bank_size": cfg["bank_size"], "seed": cfg["seed"], "normalization": norm.total,
                   "mass_to_cutoff": norm.mass, "tail_bound": norm.tail_bound, "cutoff": norm.cutoff,
                   "max_residual": max(residuals)}
    elif name == "nu-z":
        z = complex(cfg["z"].replace(" ", ""))
        if cfg["alpha_mode"] == "finite-variance":
            x = parse_grid("0:2:0.05") if grid is None else grid
            eps = tuple(float(v) for v in cfg["eps"].split(","))
            rows, header = zip(x, laws.nu_z_density(z, x, eps)), ["x", "density"]
        else:
            if cfg["alpha"] is None:
                raise UsageError("--alpha is required for --alpha-mode heavy")
            x = heavy.default_nu_grid() if grid is None else grid
            table = heavy.nu_alpha_z_table(z, cfg["alpha"], as_seed(cfg["seed"]), x)
            rows, header = zip(x, table.density), ["x", "density"]
            sidecar = {"seed": cfg["seed"], "mass": table.mass, "tail_allowance": table.tail_allowance}
    else:
        raise UsageError(f"unknown law {name!r}; choose from {', '.join(LAWS)}")
    out.parent.mkdir(parents=True, exist_ok=True)
    write_rows(out, header, rows)
    if sidecar is not None:
        write_json(Path(str(out) + ".sidecar.json"), sidecar)
    echo_config(out, cfg)
    return EXIT_OK


def cmd_verify(cfg: dict) -> int:
    suite = suites.SUITES.get(cfg["suite"])
    if suite is None:
        raise UsageError(f"unknown suite {cfg['suite']!r}; choose from {', '.join(suites.SUITES)}")
    kwargs = {"seed": as_seed(cfg["seed"]), "threads": cfg["threads"]}
    for key in ("n", "replicas", "alpha"):
        if cfg[key] is not None:
            kwargs[key] = cfg[key]
    reports = suite(**kwargs)
    for r in reports:
        print(r.line())
    payload = [r.to_dict() for r in reports]
    if cfg["out"]:
        out = Path(cfg["out"])
        out.parent.mkdir(parents=True, exist_ok=True)
        write_json(out, payload)
        echo_config(out, cfg)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def read_spectrum(path: Path) -> np.ndarray:
    values = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["re", "im"]:
            raise UsageError(f"{path}: line 1: expected header 're,im'")
        for lineno, row in enumerate(reader, start=2):
            try:
                re_part, im_part = row
                values.append(complex(float(re_part), float(im_part)))
            except ValueError:
                raise UsageError(f"{path}: line {lineno}: malformed row {row!r}") from None
    return np.array(values)


def cmd_transform(cfg: dict) -> int:
    lattice_axis = parse_grid(cfg["lattice"])
    x, y = np.meshgrid(lattice_axis, lattice_axis, indexing="xy")
    zs = x + 1j * y
    out = Path(cfg["out"])
    if cfg["kind"] == "potential":
        if cfg["input"]:
            lam = read_spectrum(Path(cfg["input"]))
        else:
            law = entry_law(cfg["ensemble"], cfg["alpha"], cfg["phase"])
            m = sample_iid_matrix(cfg["n"], law, as_seed(cfg["seed"]))
            lam = eigenvalues(m * natural_scale(cfg["ensemble"], cfg["n"], cfg["alpha"]))
        values = [log_potential_empirical(lam, z) for z in zs.ravel()]
        rows, header = ((z.real, z.imag, v) for z, v in zip(zs.ravel(), values)), ["re", "im", "potential"]
    elif cfg["kind"] == "density":
        if cfg["input"]:
            raise UsageError("density recovery needs the matrix; use --ensemble instead of --input")
        if len(lattice_axis) < 3:
            raise UsageError("density recovery needs at least 3 lattice points per axis")
        law = entry_law(cfg["ensemble"], cfg["alpha"], cfg["phase"])
        m = sample_iid_matrix(cfg["n"], law, as_seed(cfg["seed"]))
        m = m * natural_scale(cfg["ensemble"], cfg["n"], cfg["alpha"])
        step = lattice_axis[1] - lattice_axis[0]
        _, b = quaternionic_lattice(m, zs, cfg["t"], cfg["threads"])
        dens = recover_density_from_b(b, step).density
        rows, header = ((z.real, z.imag, d) for z, d in zip(zs.ravel(), dens.ravel())), ["re", "im", "density"]
    else:
        raise UsageError(f"unknown transform kind {cfg['kind']!r}")
    out.parent.mkdir(parents=True, exist_ok=True)
    write_rows(out, header, rows)
    echo_config(out, cfg)
    return EXIT_OK


REQUIRED = {"sample": ("ensemble", "n"), "law": ("name",), "verify": ("suite",), "transform": ()}
COMMANDS = {"sample": cmd_sample, "law": cmd_law, "verify": cmd_verify, "transform": cmd_transform}


def build_parser() -> Parser:
    parser = Parser(prog="rmtlab", description="Random non-Hermitian matrix laboratory.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=Parser)

    def common(p):
        p.add_argument("--seed", type=int, default=None, help="master seed (default: $RMT_DEFAULT_SEED or 0)")
        p.add_argument("--threads", type=int, default=1, help="worker threads; never changes results")
        p.add_argument("--config", default=None, help="replay a resolved config JSON")

    p = sub.add_parser("sample", help="sample a matrix and write its spectra")
    p.add_argument("--ensemble", default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--phase", default="deterministic-one", choices=PHASES)
    p.add_argument("--scale", default="natural", choices=("natural", "none"))
    p.add_argument("--out", default=".")
    common(p)

    p = sub.add_parser("law", help="tabulate a reference law")
    p.add_argument("--name", default=None)
    p.add_argument("--grid", default=None, help="lo:hi:step, inclusive")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--alpha-mode", default="finite-variance", choices=("finite-variance", "heavy"))
    p.add_argument("--z", default="0")
    p.add_argument("--bank-size", type=int, default=10**6)
    p.add_argument("--eps", default="1e-6,5e-7,2.5e-7",
                   help="imaginary offsets for the finite-variance nu-z extrapolation")
    p.add_argument("--out", default="law.csv")
    common(p)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--replicas", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--out", default=None, help="write the reports as JSON here")
    common(p)

    p = sub.add_parser("transform", help="potential or recovered density on a lattice")
    p.add_argument("--kind", default="density", choices=("density", "potential"))
    p.add_argument("--input", default=None, help="spectrum CSV with header re,im")
    p.add_argument("--ensemble", default="ginibre-complex")
    p.add_argument("--n", type=int, default=300)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--phase", default="deterministic-one", choices=PHASES)
    p.add_argument("--lattice", default="-1.5:1.5:0.1")
    p.add_argument("--t", type=float, default=0.05)
    p.add_argument("--out", default="transform.csv")
    common(p)
    return parser


VALUE_FLAGS = ("--grid", "--lattice", "--z")


def attach_values(argv: list[str]) -> list[str]:
    # lets "--grid -2:2:0.1" through; argparse would read "-2:2:0.1" as a flag
    out, i = [], 0
    while i < len(argv):
        if argv[i] in VALUE_FLAGS and i + 1 < len(argv):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def resolve(argv: list[str]) -> dict:
    argv = attach_values(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            saved = json.load(fh)
        if saved.get("command") != args.command:
            raise UsageError("config file belongs to a different command")
        # replayed values act as defaults; flags given explicitly still win
        sub = parser._subparsers._group_actions[0].choices[args.command]
        sub.set_defaults(**{k: v for k, v in saved.items() if k != "command"})
        args = parser.parse_args(argv)
    cfg = vars(args)
    cfg.pop("config")
    for flag in REQUIRED[cfg["command"]]:
        if cfg.get(flag) is None:
            raise UsageError(f"--{flag.replace('_', '-')} is required for {cfg['command']}")
    if cfg["seed"] is None:
        cfg["seed"] = default_seed().master
    if cfg.get("ensemble") is not None and cfg["command"] in ("sample", "transform") and cfg["ensemble"] not in ENSEMBLES:
        raise UsageError(f"unknown ensemble {cfg['ensemble']!r}; choose from {', '.join(ENSEMBLES)}")
    if cfg.get("n") is not None and cfg["n"] < 1:
        raise UsageError("--n must be positive")
    return cfg


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = resolve(argv)
        return COMMANDS[cfg["command"]](cfg)
    except UsageError as exc:
        print(f"rmtlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RmtError, ValueError) as exc:
        print(f"rmtlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"rmtlab: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
