"""Command-line front end: ``laguerre-owwe <command> [--config FILE] [--set KEY=VALUE ...]``.

Commands
--------
stability   amplification-factor curves and a classification table
table1      1D error table over the benchmark meshes, with convergence orders
impulse2d   2D homogeneous impulse response: snapshot grids and a depth profile
migrate     zero-offset depth migration of a section grid
eta-select  Laguerre-parameter sweep for a pulse arriving at the record end

A configuration is a JSON object or a text file of ``key = value`` lines (values
are parsed as JSON when possible, so ``meshes = [1000, 2000]`` works). ``--set``
overrides single keys. Every CSV starts with a ``# config-hash:`` comment line
followed by a header row; the hash covers the fully resolved configuration.

Exit codes: 0 success, 1 check failed (classification mismatch, no eta found),
2 usage or configuration error, 3 instability alarm.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import math
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import experiments as exp
from .laguerre import default_eta_candidates, eta_truncation_error
from .schemes1d import TABLE1_SCHEMES, InstabilityError
from .solver2d import (
    VelocityModel2D,
    constant_model,
    read_model,
    read_seismogram,
    syncline_model,
    two_layer_model,
    write_grid,
)
from .solver2d.migrate import envelope_peak_depth, flat_reflector_section, migrate
from .stability import classify
from .wavelet import SourceWavelet

log = logging.getLogger("laguerre_owwe")

EXIT_CHECK, EXIT_USAGE, EXIT_ALARM = 1, 2, 3

_WAVELET_1D = {"f0": 30.0, "t0": 0.2, "delta": 4.0}
_WAVELET_2D = {"f0": 3.0, "t0": 2.0, "delta": 4.0}

DEFAULTS = {
    "stability": {
        "schemes": ["Forward1", "Backward1", "CN", "AM3", "AM4", "AM5", "AM6"],
        "betas": [0.1, 1.0, 10.0, -0.1, -1.0, -10.0],
        "n_samples": 256,
    },
    "table1": {
        "schemes": list(TABLE1_SCHEMES),
        "meshes": list(exp.TABLE1_MESHES),
        "eta": 600.0,
        "n_terms": 2500,
        "c": 3000.0,
        "length": 7500.0,
        "record": 2.0,
        "dt": 2e-4,
        "t_eval": 2.0,
        **_WAVELET_1D,
    },
    "impulse2d": {
        "method": "pc",
        "ratio": 0.25,
        "c": 250.0,
        "width": 3500.0,
        "depth": 1500.0,
        "h_x": 10.0,
        "eta": 60.0,
        "n_terms": 400,
        "record": 6.0,
        "dt": 2e-3,
        "source_sigma": 20.0,
        "amplitude": 1.0,
        "times": [3.0, 4.5, 6.0],
        "filter_degree": 5,
        "starter": "euler",
        "refine_by": 16,
        **_WAVELET_2D,
    },
    "migrate": {
        "section": None,
        "model": None,
        "model_kind": "constant",
        "c_top": 500.0,
        "c_bottom": 1000.0,
        "interface_depth": 250.0,
        "sag": 100.0,
        "depth": 500.0,
        "h_z": 2.5,
        "h_x": 10.0,
        "smoothing_passes": 1,
        "method": "pc",
        "eta": 60.0,
        "n_terms": 300,
        "reflector_depth": 375.0,
        "nx": 61,
        "nt": 1501,
        "dt": 2e-3,
        "f0": 3.0,
        "delta": 4.0,
    },
    "eta-select": {
        "record": 2.0,
        "n_terms": 2500,
        "tol": 1e-10,
        "candidates": None,
        "dt": None,
        **_WAVELET_1D,
    },
}


class ConfigError(ValueError):
    pass


# -- configuration ---------------------------------------------------------
def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text.strip()


def load_config(path) -> dict:
    """Read a JSON object or ``key = value`` lines (``#`` starts a comment)."""
    text = Path(path).read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        data = json.loads(text)
        if not isinstance(data, dict):
            raise ConfigError("JSON configuration must be an object")
        return data
    data = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        data[key.strip()] = _parse_value(value)
    return data


def resolve_config(command: str, file_values: dict, overrides: list[str]) -> dict:
    """Defaults, then file values, then ``--set`` overrides; unknown keys are rejected."""
    cfg = dict(DEFAULTS[command])
    extra = {}
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        extra[key.strip()] = _parse_value(value)
    for source in (file_values, extra):
        unknown = sorted(set(source) - set(cfg))
        if unknown:
            raise ConfigError(f"unknown key(s) for {command}: {', '.join(unknown)}")
        cfg.update(source)
    return cfg


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _fmt(v) -> str:
    if isinstance(v, float):
        return "nan" if math.isnan(v) else f"{v:.10g}"
    return str(v)


def write_csv(path: Path, header, rows, chash: str) -> Path:
    """CSV with a ``# config-hash:`` comment line, then the header row."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(f"# config-hash: {chash}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def _wavelet(cfg: dict) -> SourceWavelet:
    return SourceWavelet(t0=float(cfg.get("t0", 0.0)), delta=float(cfg["delta"]), f0=float(cfg["f0"]))


# -- stability ----------------------------------------------------------------
def stability_expectations() -> list[dict]:
    """Bundled table of expected classifications (scheme, sign of beta, label)."""
    text = resources.files("laguerre_owwe").joinpath("data/stability_expectations.csv").read_text()
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    return list(csv.DictReader(lines))


def expected_class(table: list[dict], scheme: str, beta: float) -> str | None:
    sign = "+" if beta > 0 else "-"
    for row in table:
        if row["scheme"] == scheme and row["beta_sign"] == sign:
            return row["expected"]
    return None


def cmd_stability(cfg: dict, out: Path, chash: str) -> int:
    schemes, betas = list(cfg["schemes"]), [float(b) for b in cfg["betas"]]
    _require(len(schemes) > 0, "schemes must not be empty")
    _require(len(betas) > 0, "betas must not be empty")
    _require(all(b != 0 and math.isfinite(b) for b in betas), "betas must be finite and non-zero")
    table = stability_expectations()
    curves, classes, mismatches = [], [], 0
    for name in schemes:
        for beta in betas:
            rep = classify(name, beta, int(cfg["n_samples"]))
            curves.extend((name, beta, th, g) for th, g in rep.samples)
            expected = expected_class(table, name, beta)
            match = "" if expected is None else ("yes" if expected == rep.classification else "no")
            mismatches += match == "no"
            classes.append((name, beta, rep.max_abs_g, rep.classification, expected or "", match))
    write_csv(out / "stability_curves.csv", ["scheme", "beta", "theta", "abs_g"], curves, chash)
    write_csv(
        out / "stability_classes.csv",
        ["scheme", "beta", "max_abs_g", "classification", "expected", "match"],
        classes,
        chash,
    )
    for row in classes:
        print(f"{row[0]:>10s} beta={row[1]:+8.3g}  max|G|={row[2]:.6f}  {row[3]}")
    if mismatches:
        log.error("%d classification(s) disagree with the expectations table", mismatches)
        return EXIT_CHECK
    return 0


# -- table1 -----------------------------------------------------------------
def cmd_table1(cfg: dict, out: Path, chash: str) -> int:
    meshes = sorted(int(n) for n in cfg["meshes"])
    _require(len(meshes) > 0 and meshes[0] > 0, "meshes must be positive integers")
    setup = exp.Setup1D(
        eta=float(cfg["eta"]),
        n_terms=int(cfg["n_terms"]),
        c=float(cfg["c"]),
        length=float(cfg["length"]),
        record=float(cfg["record"]),
        dt=float(cfg["dt"]),
        t_eval=float(cfg["t_eval"]),
        wavelet=_wavelet(cfg),
    )

    def progress(name, n, err):
        log.info("N_x=%d %-10s error %s", n, name, _fmt(err))

    profiles = {}
    errors = exp.error_table(setup, cfg["schemes"], meshes, on_result=progress, profiles=profiles)
    rows = [(name, n, errors[name, n]) for name in cfg["schemes"] for n in meshes]
    write_csv(out / "table1.csv", ["scheme", "n_intervals", "rel_l2_error"], rows, chash)
    # wavefield slice and K(x) on the finest mesh; alarmed schemes are left blank
    finest = meshes[-1]
    names = ["exact"] + [s for s in cfg["schemes"] if (s, finest) in profiles]
    x = setup.mesh(finest).x
    slices = [(xj, *(profiles[s, finest][0][j] for s in names)) for j, xj in enumerate(x)]
    energy = [(xj, *(profiles[s, finest][1][j] for s in names)) for j, xj in enumerate(x)]
    write_csv(out / "table1_slice.csv", ["x"] + [f"u_{s}" for s in names], slices, chash)
    write_csv(out / "table1_energy.csv", ["x"] + [f"K_{s}" for s in names], energy, chash)
    pairs = list(zip(meshes[:-1], meshes[1:]))
    if 2000 in meshes and 4000 in meshes:
        pairs.append((2000, 4000))
    orders = []
    for name in cfg["schemes"]:
        for a, b in pairs:
            ea, eb = errors[name, a], errors[name, b]
            ok = all(math.isfinite(e) and e > 0 for e in (ea, eb))
            orders.append((name, a, b, exp.convergence_order(ea, eb, a, b) if ok else math.nan))
    write_csv(out / "table1_orders.csv", ["scheme", "n_coarse", "n_fine", "order"], orders, chash)
    width = max(len(s) for s in cfg["schemes"])
    print(f"{'N_x':>{width}s} " + " ".join(f"{n:>10d}" for n in meshes))
    for name in cfg["schemes"]:
        print(f"{name:>{width}s} " + " ".join(f"{_fmt(errors[name, n]):>10s}" for n in meshes))
    return 0


# -- impulse2d ----------------------------------------------------------------
def cmd_impulse2d(cfg: dict, out: Path, chash: str) -> int:
    _require(cfg["method"] in ("am", "pc"), "method must be 'am' or 'pc'")
    times = [float(t) for t in cfg["times"]]
    _require(all(t >= 0 for t in times), "times must be non-negative")
    setup = exp.ImpulseSetup2D(
        c=float(cfg["c"]),
        width=float(cfg["width"]),
        depth=float(cfg["depth"]),
        h_x=float(cfg["h_x"]),
        ratio=float(cfg["ratio"]),
        eta=float(cfg["eta"]),
        n_terms=int(cfg["n_terms"]),
        record=float(cfg["record"]),
        dt=float(cfg["dt"]),
        source_sigma=float(cfg["source_sigma"]),
        amplitude=float(cfg["amplitude"]),
        wavelet=_wavelet(cfg),
    )
    filt = cfg["filter_degree"]
    try:
        res = exp.impulse_2d(
            setup,
            cfg["method"],
            times,
            filter_degree=None if filt in (None, 0) else int(filt),
            starter=cfg["starter"],
            refine_by=int(cfg["refine_by"]),
        )
    except InstabilityError as exc:
        log.error("%s", exc)
        return EXIT_ALARM
    model = setup.model()
    for t, snap in zip(times, res.snapshots):
        write_grid(
            out / f"impulse_t{t:g}.bin",
            snap,
            ("nx", "nz"),
            h_x=model.h_x,
            h_z=model.h_z,
            t=t,
            method=cfg["method"],
            config_hash=chash,
        )
    max_amp = np.max(np.abs(res.snapshots), axis=1) if times else np.zeros((0, model.nz))
    header = ["z"] + [f"max_abs_u_t{t:g}" for t in times] + ["rms_coeff"]
    rms = np.sqrt(res.energy_depth / model.nx)
    rows = [[z, *max_amp[:, k], rms[k]] for k, z in enumerate(model.z)]
    write_csv(out / "impulse_depth_profile.csv", header, rows, chash)
    print(f"{cfg['method']} h_z/h_x={setup.ratio:g}: {res.terms_done} terms, "
          f"max coefficient {res.max_coeff.max():.4g}")
    return 0


# -- migrate ------------------------------------------------------------------
def _migration_model(cfg: dict, nx: int, h_x: float) -> VelocityModel2D:
    if cfg["model"]:
        model = read_model(cfg["model"])
        _require(model.nx == nx, f"model has nx={model.nx}, section has {nx} traces")
        return model
    h_z = float(cfg["h_z"])
    nz = int(round(float(cfg["depth"]) / h_z)) + 1
    nz += nz % 2 == 0
    kind = cfg["model_kind"]
    c_top, c_bottom = float(cfg["c_top"]), float(cfg["c_bottom"])
    if kind == "constant":
        return constant_model(nx, nz, h_x, h_z, c_top)
    if kind == "two-layer":
        return two_layer_model(nx, nz, h_x, h_z, c_top, c_bottom, float(cfg["interface_depth"]))
    if kind == "syncline":
        return syncline_model(nx, nz, h_x, h_z, c_top, c_bottom, float(cfg["interface_depth"]), float(cfg["sag"]))
    raise ConfigError(f"unknown model_kind {kind!r} (constant, two-layer, syncline)")


def cmd_migrate(cfg: dict, out: Path, chash: str) -> int:
    if cfg["section"]:
        section, dt, h_x = read_seismogram(cfg["section"])
    else:
        # synthetic flat reflector in the top-layer velocity
        dt, h_x = float(cfg["dt"]), float(cfg["h_x"])
        wavelet = SourceWavelet(t0=0.0, delta=float(cfg["delta"]), f0=float(cfg["f0"]))
        section = flat_reflector_section(
            int(cfg["nx"]), int(cfg["nt"]), dt, float(cfg["reflector_depth"]), float(cfg["c_top"]), wavelet
        )
    _require(int(cfg["smoothing_passes"]) >= 0, "smoothing_passes must be >= 0")
    model = _migration_model(cfg, section.shape[1], h_x)
    try:
        res = migrate(
            section,
            dt,
            model,
            float(cfg["eta"]),
            int(cfg["n_terms"]),
            method=cfg["method"],
            smoothing_passes=int(cfg["smoothing_passes"]),
        )
    except InstabilityError as exc:
        log.error("%s", exc)
        return EXIT_ALARM
    write_grid(
        out / "image.bin", res.image, ("nx", "nz"), h_x=model.h_x, h_z=model.h_z, config_hash=chash
    )
    rows = []
    for i, x in enumerate(model.x):
        col = res.image[i]
        peak = envelope_peak_depth(col, model.h_z) if np.any(col) else math.nan
        rows.append((x, peak, float(np.max(np.abs(col)))))
    write_csv(out / "image_picks.csv", ["x", "envelope_peak_depth", "max_abs_image"], rows, chash)
    centre = rows[len(rows) // 2]
    print(f"image {model.nx}x{model.nz}, record {res.record_length:g} s, "
          f"centre pick {_fmt(centre[1])} m")
    return 0


# -- eta-select ----------------------------------------------------------------
def cmd_eta_select(cfg: dict, out: Path, chash: str) -> int:
    record = float(cfg["record"])
    _require(record > 0, "record must be positive")
    candidates = cfg["candidates"] or list(default_eta_candidates())
    wavelet = _wavelet(cfg)
    rows, chosen = [], None
    for eta in sorted(float(c) for c in candidates):
        err = eta_truncation_error(wavelet, record, int(cfg["n_terms"]), eta, cfg["dt"])
        ok = err < float(cfg["tol"])
        rows.append((eta, err, "yes" if ok and chosen is None else ""))
        if ok and chosen is None:
            chosen = eta
            break
    write_csv(out / "eta_select.csv", ["eta", "rel_l2_error", "selected"], rows, chash)
    if chosen is None:
        log.error("no candidate eta reaches tolerance %g with %d terms", cfg["tol"], cfg["n_terms"])
        return EXIT_CHECK
    print(f"eta = {chosen:.6g}")
    return 0


COMMANDS = {
    "stability": cmd_stability,
    "table1": cmd_table1,
    "impulse2d": cmd_impulse2d,
    "migrate": cmd_migrate,
    "eta-select": cmd_eta_select,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="laguerre-owwe", description=__doc__.split("\n\n")[0],
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", type=Path, help="JSON or key = value file")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override one key")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory (default: .)")
        p.add_argument("--print-config", action="store_true", help="print the resolved config and exit")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        file_values = load_config(args.config) if args.config else {}
        cfg = resolve_config(args.command, file_values, args.set)
        if args.print_config:
            print(json.dumps(cfg, indent=2, sort_keys=True))
            return 0
        return COMMANDS[args.command](cfg, args.out, config_hash(cfg))
    except (ConfigError, FileNotFoundError, json.JSONDecodeError) as exc:
        parser.exit(EXIT_USAGE, f"{parser.prog} {args.command}: error: {exc}\n")


if __name__ == "__main__":
    sys.exit(main())
