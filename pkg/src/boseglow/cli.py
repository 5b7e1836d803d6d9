"""Batch front-end: `boseglow run <config>` and `boseglow validate <config>`.

The config is a single TOML file; scans have too many knobs for flags,
so the command line carries only the config path plus --output-dir and
--threads overrides.  One output file pair (CSV + JSON mirror) is
written per requested product per scan point, and a manifest records all
outputs with parameter provenance.  Per-point computation errors (for
example inclusive products requested in the Condensed regime) are
recorded in the manifest rather than aborting the run.

Exit codes: 0 ok, 1 config error, 2 computation error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import datetime
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import tomli

from . import io, oracle, raregas, spectra
from .errors import BoseglowError, ConfigError, InvalidParameter
from .multiplicity import (auto_order, classify_regime, combinants,
                           log_combinants, multiplicity_distribution)
from .params import ModelParams, derive

PRODUCTS = ("multiplicity", "spectrum", "correlation", "raregas-compare",
            "oracle-check")
SCAN_PARAMETERS = ("n0", "R", "T", "m", "sigma")


@dataclass
class ScanSpec:
    parameter: str
    start: float
    stop: float
    steps: int


@dataclass
class GridSpec:
    k_max: float = 600.0
    k_steps: int = 61
    k_mean_values: list = field(default_factory=lambda: [0.0, 150.0, 300.0])
    dk_max: float = 300.0
    dk_steps: int = 31
    side_out: bool = True
    exclusive_n: list = field(default_factory=list)
    raregas_n: int = 2


@dataclass
class NumericsSpec:
    truncation_eps: float = 1e-14
    n_max: int = 100_000
    quadrature_order: int = 64
    mc_samples: int = 100_000
    seed: int | None = None


MODEL_FIELDS = ("n0", "R", "T", "m", "sigma", "t0")


@dataclass
class RunConfig:
    """Parsed configuration; the model block stays raw until validated so
    that `validate` can report bad fields as diagnostics, not exceptions."""

    model_raw: dict
    products: list
    scan: ScanSpec | None = None
    grids: GridSpec = field(default_factory=GridSpec)
    numerics: NumericsSpec = field(default_factory=NumericsSpec)
    output_dir: str = "out"

    def model(self) -> ModelParams:
        return ModelParams(**self.model_raw)


@dataclass
class Diagnostic:
    severity: str       # "error" | "warning"
    field: str
    message: str

    def __str__(self):
        return f"{self.severity}: [{self.field}] {self.message}"


def _section(raw: dict, name: str) -> dict:
    value = raw.get(name, {})
    if not isinstance(value, dict):
        raise ConfigError(f"section [{name}] must be a table, got {type(value).__name__}")
    return value


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = tomli.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"config {path} is not valid TOML: {exc}") from exc

    model_raw = _section(raw, "model")
    unknown = sorted(set(model_raw) - set(MODEL_FIELDS))
    if unknown:
        raise ConfigError(f"[model] has unknown fields: {', '.join(unknown)}")
    for key, value in model_raw.items():
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ConfigError(f"[model] {key} must be a number, got {value!r}")

    scan = None
    if "scan" in raw:
        scan_raw = _section(raw, "scan")
        try:
            scan = ScanSpec(parameter=scan_raw["parameter"],
                            start=float(scan_raw["start"]),
                            stop=float(scan_raw["stop"]),
                            steps=int(scan_raw["steps"]))
        except KeyError as exc:
            raise ConfigError(f"[scan] is missing field {exc}") from exc

    outputs_raw = _section(raw, "outputs")
    products = outputs_raw.get("products", ["multiplicity"])
    if not isinstance(products, list) or not products:
        raise ConfigError("[outputs] products must be a non-empty list")

    try:
        grids = GridSpec(**_section(raw, "grids"))
    except TypeError as exc:
        raise ConfigError(f"[grids] has unknown fields: {exc}") from exc
    try:
        numerics = NumericsSpec(**_section(raw, "numerics"))
    except TypeError as exc:
        raise ConfigError(f"[numerics] has unknown fields: {exc}") from exc

    output_dir = _section(raw, "output").get("dir", "out")
    return RunConfig(model_raw=model_raw, products=list(products), scan=scan,
                     grids=grids, numerics=numerics, output_dir=output_dir)


def validate_config(cfg: RunConfig) -> list[Diagnostic]:
    """Diagnostics; run() starts iff there are no error-severity entries."""
    out: list[Diagnostic] = []
    missing = [k for k in MODEL_FIELDS if k != "t0" and k not in cfg.model_raw]
    for key in missing:
        out.append(Diagnostic("error", f"model.{key}", "required field is missing"))
    model = None
    if not missing:
        try:
            model = cfg.model()
        except InvalidParameter as exc:
            out.append(Diagnostic("error", f"model.{exc.field}",
                                  str(exc).split(": ", 1)[-1]))
    for product in cfg.products:
        if product not in PRODUCTS:
            out.append(Diagnostic("error", "outputs.products",
                                  f"unknown product {product!r}; known: {PRODUCTS}"))
    if cfg.scan is not None:
        if cfg.scan.parameter not in SCAN_PARAMETERS:
            out.append(Diagnostic("error", "scan.parameter",
                                  f"must be one of {SCAN_PARAMETERS}, got {cfg.scan.parameter!r}"))
        if cfg.scan.steps < 1:
            out.append(Diagnostic("error", "scan.steps", "must be >= 1"))
        if cfg.scan.steps > 1 and cfg.scan.start == cfg.scan.stop:
            out.append(Diagnostic("error", "scan.start", "empty range with steps > 1"))
        if model is not None and cfg.scan.parameter in SCAN_PARAMETERS:
            for end in (cfg.scan.start, cfg.scan.stop):
                try:
                    replace(model, **{cfg.scan.parameter: end})
                except InvalidParameter as exc:
                    out.append(Diagnostic("error", f"scan.{cfg.scan.parameter}",
                                          f"endpoint {end}: {exc}"))
                    break
    if cfg.grids.k_steps < 1:
        out.append(Diagnostic("error", "grids.k_steps", "must be >= 1"))
    if cfg.grids.dk_steps < 1:
        out.append(Diagnostic("error", "grids.dk_steps", "must be >= 1"))
    if not cfg.grids.k_mean_values:
        out.append(Diagnostic("error", "grids.k_mean_values", "must be non-empty"))
    if cfg.grids.raregas_n < 2:
        out.append(Diagnostic("error", "grids.raregas_n", "must be >= 2"))
    if any(n < 1 for n in cfg.grids.exclusive_n):
        out.append(Diagnostic("error", "grids.exclusive_n", "orders must be >= 1"))
    if "oracle-check" in cfg.products and cfg.numerics.seed is None:
        out.append(Diagnostic("error", "numerics.seed",
                              "oracle-check runs Monte Carlo; a seed is mandatory "
                              "for reproducibility"))
    if "oracle-check" in cfg.products and cfg.numerics.mc_samples < 100_000:
        out.append(Diagnostic("warning", "numerics.mc_samples",
                              f"{cfg.numerics.mc_samples} is below the 1e5 "
                              f"verification scale; statistical checks may be weak"))
    if "raregas-compare" in cfg.products and model is not None:
        x = derive(model).x
        if x < raregas.RARE_GAS_MIN_X:
            out.append(Diagnostic(
                "warning", "outputs.products",
                f"raregas-compare requested at x = {x:.4g} < {raregas.RARE_GAS_MIN_X}; "
                f"the expansion is out of its validity range (computed anyway)"))
    return out


def _scan_points(cfg: RunConfig) -> list[ModelParams]:
    base = cfg.model()
    if cfg.scan is None:
        return [base]
    values = np.linspace(cfg.scan.start, cfg.scan.stop, cfg.scan.steps)
    return [replace(base, **{cfg.scan.parameter: float(v)}) for v in values]


def _product_multiplicity(params, d, cfg):
    regime = classify_regime(d, params.n0)
    order = auto_order(d, params.n0, eps=cfg.numerics.truncation_eps,
                       n_max=cfg.numerics.n_max)
    series = combinants(d, params.n0, order)
    dist = multiplicity_distribution(series)
    n_rows = len(dist.p)
    orders = np.arange(1, n_rows)
    log_c = log_combinants(d, params.n0, orders) if n_rows > 1 else np.array([])
    c_col = np.concatenate([[0.0], np.exp(log_c)])   # C_0 has no meaning; 0 by convention
    n_col = np.arange(n_rows)
    columns = {
        "n": n_col,
        "C_n": c_col,
        "p_n": dist.p,
        "n_C_n": n_col * c_col,
        "cumulative": np.cumsum(dist.p),
    }
    header = {"product": "multiplicity", "regime": regime.value,
              "mean_multiplicity": dist.mean, "combinant_order": order}
    return columns, header


def _product_spectrum(params, d, cfg):
    kmags = np.linspace(0.0, cfg.grids.k_max, cfg.grids.k_steps)
    tables = [spectra.spectrum_table(d, params.n0, kmags)]
    tables += [spectra.spectrum_table(d, params.n0, kmags, n=n)
               for n in cfg.grids.exclusive_n]
    columns = {"k": kmags}
    for table in tables:
        n = table.metadata["fixed_n"]
        columns["N1" if n is None else f"N1_n{n}"] = table.values
    header = {"product": "spectrum", "regime": classify_regime(d, params.n0).value,
              "k_max": cfg.grids.k_max, "k_steps": cfg.grids.k_steps}
    return columns, header


def _product_correlation(params, d, cfg):
    dks = np.linspace(0.0, cfg.grids.dk_max, cfg.grids.dk_steps)
    directions = ["out", "side"] if cfg.grids.side_out else ["out"]
    cols = {"K": [], "dk": [], "direction": [], "C2": []}
    for kmag in cfg.grids.k_mean_values:
        K = np.array([0.0, 0.0, float(kmag)])
        for direction in directions:
            table = spectra.correlation_table(d, params.n0, K, dks, direction)
            cols["K"] += [float(kmag)] * len(dks)
            cols["dk"] += list(dks)
            cols["direction"] += [direction] * len(dks)
            cols["C2"] += list(table.values)
    header = {"product": "correlation", "kind": "inclusive",
              "dk_max": cfg.grids.dk_max, "dk_steps": cfg.grids.dk_steps}
    return cols, header


def _product_raregas(params, d, cfg):
    dks = np.linspace(0.0, cfg.grids.dk_max, cfg.grids.dk_steps)
    n = cfg.grids.raregas_n
    directions = ["out", "side"] if cfg.grids.side_out else ["out"]
    cols = {"K": [], "dk": [], "direction": [], "C2_exact": [], "C2_rare": [],
            "abs_dev": [], "rel_dev": []}
    max_abs = 0.0
    for direction in directions:
        report = raregas.compare_exact_vs_rare(
            d, params.n0, n, cfg.grids.k_mean_values, dks, direction=direction)
        cols["K"] += list(report.k_mean)
        cols["dk"] += list(report.dk)
        cols["direction"] += [direction] * len(report.dk)
        cols["C2_exact"] += list(report.c2_exact)
        cols["C2_rare"] += list(report.c2_rare)
        cols["abs_dev"] += list(report.abs_dev)
        cols["rel_dev"] += list(report.rel_dev)
        max_abs = max(max_abs, report.max_abs_dev)
    header = {"product": "raregas-compare", "n": n, "x": d.x,
              "valid": d.x >= raregas.RARE_GAS_MIN_X, "max_abs_dev": max_abs}
    return cols, header


RING_CHECK_TOL = 1e-10
MC_CHECK_SIGMA = 3.0


def _product_oracle_check(params, d, cfg):
    rng = np.random.default_rng(np.random.SeedSequence(
        entropy=cfg.numerics.seed, spawn_key=(0xC0DE,)))
    coeffs = oracle.ring_recursion(d, params.n0, 20)
    scale = math.sqrt(d.sigma_t2)
    ring_dev = 0.0
    for coeff in coeffs:
        # n0-independent comparison: both sides with the n0^n factor dropped
        kern = spectra.kernel(d, 1.0, coeff.n)
        for _ in range(8):
            k1 = rng.normal(0.0, scale, 3)
            k2 = rng.normal(0.0, scale, 3)
            log_ring = (math.log(coeff.h) - coeff.a * (k1 @ k1 + k2 @ k2)
                        + coeff.g * (k1 @ k2))
            ring_dev = max(ring_dev, abs(math.expm1(log_ring - kern.log_evaluate(k1, k2))))

    cols = {"check": [], "n": [], "statistic": [], "value": [], "threshold": [],
            "status": []}
    cols["check"].append("ring-vs-closed-form")
    cols["n"].append(20)
    cols["statistic"].append("max_rel_dev")
    cols["value"].append(ring_dev)
    cols["threshold"].append(RING_CHECK_TOL)
    cols["status"].append("ok" if ring_dev < RING_CHECK_TOL else "fail")

    extras = []
    for n in (2, 3):
        mc = oracle.mc_exclusive_spectrum(
            params, n, cfg.numerics.mc_samples, cfg.numerics.seed)
        exact = spectra.exclusive_n1_grid(d, params.n0, n, mc.k) / n
        z = np.abs(mc.values - exact) / np.where(mc.errors > 0, mc.errors, np.inf)
        zmax = float(z.max())
        cols["check"].append("mc-vs-exclusive-n1")
        cols["n"].append(n)
        cols["statistic"].append("max_abs_z")
        cols["value"].append(zmax)
        cols["threshold"].append(MC_CHECK_SIGMA)
        cols["status"].append("ok" if zmax <= MC_CHECK_SIGMA else "fail")
        extras.append((f"_mc_n{n}", {
            "k": mc.k,
            "N1_over_n_mc": mc.values,
            "stat_error": mc.errors,
            "N1_over_n_exact": exact,
        }, {
            "product": f"oracle-check MC spectrum, n = {n}",
            "seed": mc.seed, "n_streams": mc.n_streams,
            "n_samples": mc.n_samples,
            "mean_weight": mc.mean_weight,
            "mean_weight_error": mc.mean_weight_error,
        }))

    header = {"product": "oracle-check", "seed": cfg.numerics.seed,
              "mc_samples": cfg.numerics.mc_samples}
    return cols, header, extras


_PRODUCT_FN = {
    "multiplicity": _product_multiplicity,
    "spectrum": _product_spectrum,
    "correlation": _product_correlation,
    "raregas-compare": _product_raregas,
    "oracle-check": _product_oracle_check,
}


def _run_point(index: int, params: ModelParams, cfg: RunConfig, outdir: Path) -> dict:
    d = derive(params)
    entry = {
        "index": index,
        "params": {k: getattr(params, k) for k in ("n0", "R", "T", "m", "sigma", "t0")},
        "derived": {"x": d.x, "nc": d.nc,
                    "regime": classify_regime(d, params.n0).value},
        "products": [],
    }
    for product in cfg.products:
        record = {"product": product, "status": "ok", "files": []}
        stem = f"{product.replace('-', '_')}_{index:03d}"
        try:
            result = _PRODUCT_FN[product](params, d, cfg)
            columns, meta = result[0], result[1]
            extras = result[2] if len(result) > 2 else []
            for suffix, cols, hdr in [("", columns, meta)] + list(extras):
                csv_path = outdir / f"{stem}{suffix}.csv"
                json_path = outdir / f"{stem}{suffix}.json"
                io.write_csv(csv_path, cols, io.params_header(params, d, hdr))
                io.write_json(json_path, {"header": hdr,
                                          "params": entry["params"],
                                          "derived": entry["derived"],
                                          "columns": cols})
                record["files"] += [csv_path.name, json_path.name]
        except BoseglowError as exc:
            record["status"] = "error"
            record["error"] = f"{type(exc).__name__}: {exc}"
        entry["products"].append(record)
    return entry


def run(cfg: RunConfig, output_dir: str | None = None, threads: int = 1) -> int:
    diagnostics = validate_config(cfg)
    errors = [diag for diag in diagnostics if diag.severity == "error"]
    for diag in diagnostics:
        print(diag, file=sys.stderr)
    if errors:
        return 1

    outdir = Path(output_dir or cfg.output_dir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create output directory {outdir}: {exc}", file=sys.stderr)
        return 3

    points = _scan_points(cfg)
    try:
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                entries = list(pool.map(
                    lambda ip: _run_point(ip[0], ip[1], cfg, outdir),
                    enumerate(points)))
        else:
            entries = [_run_point(i, p, cfg, outdir) for i, p in enumerate(points)]
    except OSError as exc:
        print(f"error: I/O failure while writing outputs: {exc}", file=sys.stderr)
        return 3

    n_errors = sum(1 for e in entries for r in e["products"] if r["status"] == "error")
    manifest = {
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "output_dir": str(outdir),
        "scan": None if cfg.scan is None else vars(cfg.scan),
        "products": cfg.products,
        "n_points": len(points),
        "n_errors": n_errors,
        "points": entries,
    }
    try:
        io.write_json(outdir / "manifest.json", manifest)
    except OSError as exc:
        print(f"error: cannot write manifest: {exc}", file=sys.stderr)
        return 3
    return 2 if n_errors else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="boseglow",
        description="Multiplicity, spectra and correlation tables for the "
                    "stimulated-emission wave-packet model.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (("run", "execute a config and write output tables"),
                            ("validate", "check a config and print diagnostics")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="path to a TOML run configuration")
        if name == "run":
            p.add_argument("--output-dir", default=None,
                           help="override [output].dir from the config")
            p.add_argument("--threads", type=int, default=1,
                           help="scan points computed concurrently")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    if args.command == "validate":
        diagnostics = validate_config(cfg)
        for diag in diagnostics:
            print(diag)
        if any(d.severity == "error" for d in diagnostics):
            return 1
        print(f"ok: {len(diagnostics)} warning(s)" if diagnostics else "ok")
        return 0

    return run(cfg, output_dir=args.output_dir, threads=args.threads)


if __name__ == "__main__":
    sys.exit(main())
