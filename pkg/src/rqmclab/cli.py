"""Command-line front end.

Subcommands: points, experiment, spectrum, geometry, fit, verify-net, plot.
Configuration is a flat ``key = value`` text file with ``#`` comments;
``--set key=value`` flags override file values, and the resolved
configuration is echoed into the output directory. Every output CSV carries
a comment header with the resolved seed, module versions, and parameter
provenance, and floats print with 17 significant digits so the files parse
back losslessly. The experiment report path renders the log-log boxplot
figure next to the delimited output.

Exit codes: 0 success, 2 configuration error, 3 precision refusal,
4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import experiment as xp
from . import integrands, lds
from . import provenance as _provenance
from .errors import BudgetError, ConfigError, InternalError, PrecisionError
from .spectral import (catalog_vector, count_boundary_cells, decay_fit,
                       fourier_spectrum, sigma2_ell_beta, sigma2_walsh)

OUTDIR_ENV = "RQMCLAB_OUTDIR"
PLOT_HASHSALT = "rqmclab"


# ---------------------------------------------------------------------------
# CSV helpers
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, float) and not isinstance(x, bool):
        return format(x, ".17g")
    return str(x)


def write_csv(path: str, columns: list[str], rows, comments: dict | None = None) -> None:
    with open(path, "w", newline="") as fh:
        for key, value in (comments or {}).items():
            fh.write(f"# {key}: {value}\n")
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def read_csv(path: str):
    """(comment dict, column list, row lists); inverse of write_csv."""
    comments: dict[str, str] = {}
    header = None
    rows = []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                body = line[1:].strip()
                key, _, value = body.partition(":")
                comments[key.strip()] = value.strip()
                continue
            if not line.strip():
                continue
            parsed = next(csv.reader([line]))
            if header is None:
                header = parsed
            else:
                rows.append(parsed)
    return comments, header or [], rows


def _standard_comments(seed=None, extra: dict | None = None) -> dict:
    out = {"generator": "rqmclab " + _provenance()["rqmclab"],
           "versions": ", ".join(f"{k}={v}" for k, v in _provenance().items())}
    if seed is not None:
        out["seed"] = str(seed)
    out.update(extra or {})
    return out


# ---------------------------------------------------------------------------
# Flat key = value configuration
# ---------------------------------------------------------------------------

def _parse_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("on", "true", "1", "yes"):
        return True
    if low in ("off", "false", "0", "no"):
        return False
    raise ValueError(f"expected on/off, got {raw!r}")


def _parse_int_list(raw: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in raw.replace(",", " ").split())


def _parse_float_list(raw: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in raw.replace(",", " ").split())


def _choice(*options):
    def parse(raw: str) -> str:
        if raw not in options:
            raise ValueError(f"expected one of {options}, got {raw!r}")
        return raw
    return parse


@dataclass
class Key:
    parse: object
    default: object = None
    required: bool = False
    help: str = ""


_COMMON = {
    "seed": Key(int, default=20240817),
    "threads": Key(int, default=1),
}

SCHEMAS: dict[str, dict[str, Key]] = {
    "points": {
        **_COMMON,
        "sequence": Key(_choice("rslr", "sobol"), default="sobol"),
        "dim": Key(int, required=True),
        "n": Key(int, required=True),
        "randomized": Key(_parse_bool, default=True),
        "stream": Key(int, default=0),
        "vector": Key(_parse_int_list, default=()),
        "direction_file": Key(str, default=""),
    },
    "experiment": {
        **_COMMON,
        "example": Key(_choice("ex1", "ex2", "ex3", "ex4", "smooth"), required=True),
        "dim": Key(int, required=True),
        "M": Key(float, default=0.1),
        "sequence": Key(_choice("rslr", "sobol"), default="sobol"),
        "n_log2_min": Key(int, default=6),
        "n_log2_max": Key(int, default=14),
        "replicates": Key(int, default=256),
        "radius": Key(float, default=1.0),
        "bound": Key(float, default=1.0),
        "box_lower": Key(_parse_float_list, default=()),
        "box_upper": Key(_parse_float_list, default=()),
        "fit_n_min": Key(float, default=0.0),
        "fit_n_max": Key(float, default=float("inf")),
        "plot": Key(_parse_bool, default=True),
        "reference_cache": Key(str, default=integrands.DEFAULT_CACHE),
        "direction_file": Key(str, default=""),
    },
    "spectrum": {
        **_COMMON,
        "transform": Key(_choice("fourier", "walsh"), required=True),
        "function": Key(_choice("pow", "neglog", "ramp"), default="pow"),
        "A": Key(float, default=0.25),
        "q": Key(int, default=18),
        "n_max": Key(int, default=4096),
        "ell_min": Key(int, default=1),
        "ell_max": Key(int, default=12),
    },
    "geometry": {
        **_COMMON,
        "example": Key(_choice("ex1", "ex2", "ex3", "ex4"), required=True),
        "dim": Key(int, required=True),
        "radius": Key(float, default=1.0),
        "bound": Key(float, default=1.0),
        "r_list": Key(_parse_int_list, default=(8, 16, 32, 64, 128, 256, 512, 1024)),
    },
    "fit": {
        **_COMMON,
        "input": Key(str, required=True),
        "size_col": Key(str, default="N"),
        "value_col": Key(str, default="mse"),
        "window_min": Key(float, default=0.0),
        "window_max": Key(float, default=float("inf")),
    },
    "verify-net": {
        **_COMMON,
        "dim": Key(int, required=True),
        "m": Key(int, default=8),
        "scrambles": Key(int, default=10),
        "direction_file": Key(str, default=""),
    },
    "plot": {
        **_COMMON,
        "input": Key(str, required=True),
        "title": Key(str, default=""),
    },
}


@dataclass
class CliConfig:
    command: str
    values: dict
    out_dir: str
    warnings: list[str] = field(default_factory=list)


def parse_config(text: str, schema: dict[str, Key]):
    """Parse ``key = value`` lines (#-comments) against a schema.

    Unknown keys, bad types, and (at resolve time) missing required keys are
    configuration errors carrying the offending line number. Duplicate keys
    follow last-wins with a warning.
    """
    values = {}
    warnings = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw!r}", line=lineno)
        key, _, raw_value = line.partition("=")
        key = key.strip()
        raw_value = raw_value.strip()
        if key not in schema:
            raise ConfigError(f"unknown key {key!r}", line=lineno)
        try:
            value = schema[key].parse(raw_value)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"key {key!r}: {exc}", line=lineno) from None
        if key in values:
            warnings.append(f"line {lineno}: duplicate key {key!r}, last value wins")
        values[key] = value
    return values, warnings


def resolve_config(command: str, file_text: str | None, overrides: list[str],
                   out_dir: str | None) -> CliConfig:
    schema = SCHEMAS[command]
    values, warnings = parse_config(file_text or "", schema)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, _, raw_value = item.partition("=")
        key = key.strip()
        if key not in schema:
            raise ConfigError(f"unknown key {key!r} in --set")
        try:
            values[key] = schema[key].parse(raw_value.strip())
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"key {key!r}: {exc}") from None
    for key, spec in schema.items():
        if key not in values:
            if spec.required:
                raise ConfigError(f"missing required key {key!r}")
            values[key] = spec.default
    _validate(command, values)
    out = out_dir or os.environ.get(OUTDIR_ENV) or "."
    return CliConfig(command=command, values=values, out_dir=out, warnings=warnings)


def _validate(command: str, v: dict) -> None:
    if "M" in v and not v["M"] < 0.25:
        raise ConfigError(f"M = {v['M']} violates M < 1/4")
    if "replicates" in v and v["replicates"] < 2:
        raise ConfigError("replicates must be >= 2")
    if "threads" in v and v["threads"] < 1:
        raise ConfigError("threads must be >= 1")
    if command == "experiment" and v["n_log2_min"] > v["n_log2_max"]:
        raise ConfigError("n_log2_min exceeds n_log2_max")
    if command == "spectrum" and v["transform"] == "fourier" and v["n_max"] >= 1 << (v["q"] - 1):
        raise ConfigError("n_max must stay below half the panel count 2^q")


def echo_config(cfg: CliConfig) -> str:
    """Round-trippable ``key = value`` rendering of the resolved config."""
    lines = [f"# resolved {cfg.command} configuration"]
    for key in sorted(cfg.values):
        value = cfg.values[key]
        if isinstance(value, bool):
            rendered = "on" if value else "off"
        elif isinstance(value, tuple):
            rendered = ",".join(_fmt(x) for x in value)
        else:
            rendered = _fmt(value)
        lines.append(f"{key} = {rendered}")
    return "\n".join(lines) + "\n"


def _write_echo(cfg: CliConfig) -> None:
    os.makedirs(cfg.out_dir, exist_ok=True)
    with open(os.path.join(cfg.out_dir, f"{cfg.command.replace('-', '_')}_config.txt"),
              "w") as fh:
        fh.write(echo_config(cfg))


# ---------------------------------------------------------------------------
# Plotting
# ---------------------------------------------------------------------------

@dataclass
class PlotSpec:
    """Log-log boxplot description: one box per N, whiskers at (1, 99)th."""

    ns: list[int]
    percentiles: list[tuple[float, float, float, float, float]]  # p01..p99
    mses: list[float]
    slope: float
    title: str = "RQMC squared-error convergence"
    whisker_tags: tuple[int, int] = (1, 99)


def plot_spec_from_summary(path: str, title: str = "") -> PlotSpec:
    comments, header, rows = read_csv(path)
    idx = {name: k for k, name in enumerate(header)}
    needed = ["N", "mse", "p01", "p25", "p50", "p75", "p99", "slope"]
    missing = [c for c in needed if c not in idx]
    if missing and rows:
        raise ConfigError(f"summary CSV lacks columns {missing}")
    ns, percs, mses, slope = [], [], [], float("nan")
    for row in rows:
        ns.append(int(float(row[idx["N"]])))
        percs.append(tuple(float(row[idx[p]]) for p in ("p01", "p25", "p50", "p75", "p99")))
        mses.append(float(row[idx["mse"]]))
        slope = float(row[idx["slope"]])
    return PlotSpec(ns=ns, percentiles=percs, mses=mses, slope=slope,
                    title=title or f"RQMC convergence ({os.path.basename(path)})")


def emit_plot(spec: PlotSpec) -> bytes:
    """Deterministic SVG: boxes p25..p75, whiskers p01..p99, median tick,
    dashed guide line at the fitted slope (needs >= 3 boxes)."""
    import matplotlib
    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    with plt.rc_context({"svg.hashsalt": PLOT_HASHSALT, "figure.figsize": (6.0, 4.2)}):
        fig, ax = plt.subplots()
        stats = []
        kept = []
        for n, (p01, p25, p50, p75, p99) in zip(spec.ns, spec.percentiles):
            if p01 <= 0.0:
                continue  # degenerate (e.g. exact estimator); nothing to draw in log scale
            stats.append({"med": np.log2(p50), "q1": np.log2(p25), "q3": np.log2(p75),
                          "whislo": np.log2(p01), "whishi": np.log2(p99),
                          "label": str(n), "fliers": []})
            kept.append(n)
        if stats:
            ax.bxp(stats, positions=[np.log2(n) for n in kept], widths=0.45,
                   showfliers=False)
        finite_mse = [(n, m) for n, m in zip(spec.ns, spec.mses) if m > 0]
        if np.isfinite(spec.slope) and len(finite_mse) >= 3:
            x = np.array([np.log2(n) for n, _ in finite_mse])
            y = np.array([np.log2(m) for _, m in finite_mse])
            intercept = float(np.mean(y - spec.slope * x))
            ax.plot(x, intercept + spec.slope * x, "k--",
                    label=f"slope {spec.slope:.2f}")
            ax.legend(loc="upper right")
        ax.set_xlabel("log2 N")
        ax.set_ylabel("log2 squared error")
        lo, hi = spec.whisker_tags
        ax.set_title(f"{spec.title} (whiskers p{lo:02d}/p{hi:02d})")
        buf = io.BytesIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Subcommand implementations
# ---------------------------------------------------------------------------

def _sobol_params(v: dict) -> lds.SobolParams:
    if v.get("direction_file"):
        with open(v["direction_file"]) as fh:
            return lds.parse_direction_numbers(fh.read())
    return lds.default_sobol_params()


def _integrand_spec(v: dict) -> integrands.IntegrandSpec:
    spec = integrands.example_spec(v["example"], v["dim"], v["M"])
    region = spec.region
    if isinstance(region, integrands.Hypersphere) and v["radius"] != 1.0:
        region = integrands.Hypersphere(v["radius"])
    elif isinstance(region, integrands.Halfspace) and v["bound"] != 1.0:
        region = integrands.Halfspace(region.coeffs, v["bound"])
    if v.get("box_lower") and v.get("box_upper"):
        if v["example"] == "ex3":
            region = integrands.AxisBox(tuple(v["box_lower"]), tuple(v["box_upper"]))
        elif v["example"] == "ex4":
            region = integrands.PartialAxis(region.box_axes, tuple(v["box_lower"]),
                                            tuple(v["box_upper"]), v["radius"])
    return integrands.IntegrandSpec(growth=spec.growth, region=region, dim=spec.dim)


def cmd_points(cfg: CliConfig) -> int:
    v = cfg.values
    n, s = v["n"], v["dim"]
    if v["sequence"] == "sobol":
        if n & (n - 1):
            raise ConfigError(f"Sobol' point counts must be powers of two, got {n}")
        params = _sobol_params(v)
        scramble = (lds.linear_scramble(v["seed"], v["stream"], s, params.max_bits)
                    if v["randomized"] else None)
        pts = lds.sobol_points(params, n.bit_length() - 1, s, scramble)
        prov = {"sequence": "sobol", "direction_numbers":
                v.get("direction_file") or "embedded table dims 1-16"}
    else:
        gen = (lds.GeneratingVector(tuple(v["vector"]), n) if v["vector"]
               else catalog_vector(n, s))
        shift = (lds.random_shift(v["seed"], v["stream"], s) if v["randomized"]
                 else np.zeros(s))
        pts = lds.lattice_points(gen, shift)
        prov = {"sequence": "rslr", "vector": f"z={gen.z}"}
    _write_echo(cfg)
    out = os.path.join(cfg.out_dir, "points.csv")
    write_csv(out, [f"dim_{j + 1}" for j in range(s)], pts.tolist(),
              comments=_standard_comments(v["seed"], prov))
    print(out)
    return 0


def cmd_experiment(cfg: CliConfig) -> int:
    v = cfg.values
    spec = _integrand_spec(v)
    grid = tuple(1 << m for m in range(v["n_log2_min"], v["n_log2_max"] + 1))
    config = xp.ExperimentConfig(
        sequence=v["sequence"], n_grid=grid, replicates=v["replicates"],
        integrand=spec, seed=v["seed"],
        sobol_params=_sobol_params(v) if v.get("direction_file") else None)
    result = xp.run_experiment(config, threads=v["threads"],
                               cache_path=v["reference_cache"], update_cache=True)
    window = None
    if v["fit_n_min"] > 0 or np.isfinite(v["fit_n_max"]):
        window = (max(v["fit_n_min"], grid[0]), min(v["fit_n_max"], grid[-1]))
    stats = xp.summarize(result.records, fit_window=window)
    _write_echo(cfg)
    comments = _standard_comments(v["seed"], result.provenance)
    results_path = os.path.join(cfg.out_dir, "results.csv")
    write_csv(results_path, ["sequence", "N", "replicate", "estimate", "sq_error"],
              [(r.sequence, r.n, r.replicate, r.estimate, r.sq_error)
               for r in result.records], comments=comments)
    summary_path = os.path.join(cfg.out_dir, "summary.csv")
    write_csv(summary_path,
              ["N", "mse", "var", "p01", "p25", "p50", "p75", "p99", "slope", "slope_stderr"],
              [(row.n, row.mse, row.var, *row.percentiles, stats.slope, stats.slope_stderr)
               for row in stats.rows], comments=comments)
    print(results_path)
    print(summary_path)
    if v["plot"]:
        svg = emit_plot(plot_spec_from_summary(summary_path))
        figure_path = os.path.join(cfg.out_dir, "summary.svg")
        with open(figure_path, "wb") as fh:
            fh.write(svg)
        print(figure_path)
    return 0


_SPECTRUM_FUNCTIONS = {
    "pow": lambda A: (lambda p: p[:, 0] ** -A * (1.0 - p[:, 0]) ** -A),
    "neglog": lambda A: (lambda p: -np.log(p[:, 0])),
    "ramp": lambda A: (lambda p: p[:, 0]),
}


def cmd_spectrum(cfg: CliConfig) -> int:
    v = cfg.values
    f = _SPECTRUM_FUNCTIONS[v["function"]](v["A"])
    _write_echo(cfg)
    out = os.path.join(cfg.out_dir, "spectrum.csv")
    tag = {"function": v["function"], "A": str(v["A"])}
    if v["transform"] == "fourier":
        table = fourier_spectrum(f, q=v["q"], n_max=v["n_max"])
        rows = [(";".join(str(i) for i in idx), mag2, table.quad_tag)
                for idx, mag2 in table.iter_rows()]
        write_csv(out, ["index", "magnitude_sq", "quad_tag"], rows,
                  comments=_standard_comments(v["seed"], tag))
    else:
        rows = []
        for ell in range(v["ell_min"], v["ell_max"] + 1):
            rows.append((ell, sigma2_walsh(f, ell), sigma2_ell_beta(f, ell)))
        write_csv(out, ["ell", "sigma2_fwht", "sigma2_beta"], rows,
                  comments=_standard_comments(v["seed"], tag))
    print(out)
    return 0


def cmd_geometry(cfg: CliConfig) -> int:
    v = cfg.values
    region = integrands.example_region(v["example"], v["dim"])
    if isinstance(region, integrands.Hypersphere) and v["radius"] != 1.0:
        region = integrands.Hypersphere(v["radius"])
    if isinstance(region, integrands.Halfspace) and v["bound"] != 1.0:
        region = integrands.Halfspace(region.coeffs, v["bound"])
    rows = []
    for r in v["r_list"]:
        counts = count_boundary_cells(region, r, dim=v["dim"])
        rows.append((r, counts.t_tot, counts.t_bdy))
    _write_echo(cfg)
    out = os.path.join(cfg.out_dir, "geometry.csv")
    write_csv(out, ["r", "T_tot", "T_bdy"], rows,
              comments=_standard_comments(v["seed"], {"region": repr(region)}))
    print(out)
    return 0


def cmd_fit(cfg: CliConfig) -> int:
    v = cfg.values
    _, header, rows = read_csv(v["input"])
    idx = {name: k for k, name in enumerate(header)}
    for col in (v["size_col"], v["value_col"]):
        if col not in idx:
            raise ConfigError(f"input lacks column {col!r}; has {header}")
    pairs = [(float(r[idx[v["size_col"]]]), float(r[idx[v["value_col"]]])) for r in rows]
    window = None
    if v["window_min"] > 0 or np.isfinite(v["window_max"]):
        sizes = [p[0] for p in pairs]
        window = (max(v["window_min"], min(sizes)), min(v["window_max"], max(sizes)))
    fit = decay_fit(pairs, window=window)
    _write_echo(cfg)
    out = os.path.join(cfg.out_dir, "fit.csv")
    write_csv(out, ["exponent", "stderr", "log_factor", "log_exponent", "n_points"],
              [(fit.exponent, fit.stderr, int(fit.log_factor),
                fit.log_exponent if fit.log_exponent is not None else float("nan"),
                fit.n_points)],
              comments=_standard_comments(v["seed"], {"input": v["input"]}))
    print(f"exponent {fit.exponent:.4f} +- {fit.stderr:.4f}"
          f" log_factor={'yes' if fit.log_factor else 'no'}")
    print(out)
    return 0


def cmd_verify_net(cfg: CliConfig) -> int:
    v = cfg.values
    params = _sobol_params(v)
    s, m = v["dim"], v["m"]
    base = lds.verify_net_property(lds.sobol_points(params, m, s), m, s)
    rows = [("unscrambled", -1, base)]
    print(f"unscrambled t = {base}")
    for k in range(v["scrambles"]):
        sc = lds.linear_scramble(v["seed"], k, s, params.max_bits)
        t = lds.verify_net_property(lds.sobol_points(params, m, s, sc), m, s)
        rows.append(("scrambled", k, t))
        if t != base:
            raise InternalError(
                f"scramble stream {k} changed the net quality: t={t} vs {base}")
    print(f"{v['scrambles']} scrambles: t = {base} (all identical)")
    _write_echo(cfg)
    out = os.path.join(cfg.out_dir, "verify_net.csv")
    write_csv(out, ["kind", "stream", "t"], rows,
              comments=_standard_comments(v["seed"], {"dim": str(s), "m": str(m)}))
    print(out)
    return 0


def cmd_plot(cfg: CliConfig) -> int:
    v = cfg.values
    spec = plot_spec_from_summary(v["input"], title=v["title"])
    _write_echo(cfg)
    out = os.path.join(cfg.out_dir, "summary.svg")
    with open(out, "wb") as fh:
        fh.write(emit_plot(spec))
    print(out)
    return 0


_COMMANDS = {
    "points": cmd_points,
    "experiment": cmd_experiment,
    "spectrum": cmd_spectrum,
    "geometry": cmd_geometry,
    "fit": cmd_fit,
    "verify-net": cmd_verify_net,
    "plot": cmd_plot,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="rqmclab",
        description="Randomized QMC point sets, spectra, and experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name, help=f"{name} subcommand")
        p.add_argument("--config", help="key = value configuration file")
        p.add_argument("--set", action="append", default=[], dest="overrides",
                       metavar="KEY=VALUE", help="override a configuration key")
        p.add_argument("--out", help=f"output directory (default ${OUTDIR_ENV} or .)")
    args = parser.parse_args(argv)
    try:
        text = None
        if args.config:
            if not os.path.exists(args.config):
                raise ConfigError(f"config file {args.config!r} not found")
            with open(args.config) as fh:
                text = fh.read()
        cfg = resolve_config(args.command, text, args.overrides, args.out)
        for warning in cfg.warnings:
            print(f"warning: {warning}", file=sys.stderr)
        os.makedirs(cfg.out_dir, exist_ok=True)
        return _COMMANDS[args.command](cfg)
    except PrecisionError as exc:
        print(f"precision refusal: {exc}", file=sys.stderr)
        return 3
    except (InternalError, AssertionError) as exc:
        print(f"internal invariant violation: {exc}", file=sys.stderr)
        return 4
    except (ConfigError, BudgetError, ValueError, KeyError) as exc:
        # bad or oversized user input, including catalog misses
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
