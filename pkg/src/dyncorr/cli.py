"""Command-line interface: simulation, estimation, oracles and experiments.

Exit codes: 0 success, 1 runtime or I/O error, 2 usage error, 3 experiment
assertion failure.  The master seed defaults to the decimal value of the
``DYNCORR_SEED`` environment variable, falling back to 0.

All numeric output uses 17 significant digits so files round-trip exactly;
experiment runs write ``report.json`` and ``curves.csv`` plus a
``manifest.json`` (written last) listing every output file with its sha256.
"""

from __future__ import annotations

import configparser
import datetime
import functools
import hashlib
import json
import math
import os
from pathlib import Path

import click
import numpy as np

from . import __version__, bm, gbm
from .errors import DyncorrError
from .harness import EXPERIMENTS, ExperimentConfig, run_experiment
from .profiles import CorrelationProfile, TimeGrid, build_profile
from .simulate import simulate_bm_pair, simulate_gbm_pair

_FLOAT_FMT = "%.17g"


def _fmt(value: float) -> str:
    return _FLOAT_FMT % value


def _runtime_errors(fn):
    """Map package and I/O errors to exit code 1 with a clean message."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (DyncorrError, OSError, ValueError) as exc:
            raise click.ClickException(str(exc)) from exc

    return wrapper


def _load_profile(spec: str, grid: TimeGrid) -> CorrelationProfile:
    """Profile mini-grammar, with ``table:@file`` reading one value per line."""
    if spec.startswith("table:@"):
        path = Path(spec[len("table:@"):])
        values = [
            line.strip() for line in path.read_text().splitlines() if line.strip()
        ]
        if values and values[0].lower() in ("rho", "value"):
            values = values[1:]
        spec = "table:" + ",".join(values)
    return build_profile(spec, grid)


def _nonnegative(ctx, param, value):
    if value is not None and value < 0:
        raise click.BadParameter(f"must be >= 0, got {value}")
    return value


def _positive(ctx, param, value):
    if value is not None and value <= 0:
        raise click.BadParameter(f"must be > 0, got {value}")
    return value


seed_option = click.option(
    "--seed", type=int, default=0, envvar="DYNCORR_SEED", show_default=True,
    help="Master seed (env DYNCORR_SEED).",
)


@click.group()
@click.version_option(__version__, prog_name="dyncorr")
def main():
    """Dynamic-correlation estimation toolkit."""


# ---------------------------------------------------------------------------
# simulate

@main.group()
def simulate():
    """Generate correlated path pairs."""


@simulate.command("bm")
@click.option("--profile", required=True, help="Profile spec, e.g. constant:0.5.")
@click.option("--T", "T", type=int, required=True, help="Grid length.")
@seed_option
@click.option("--replication", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False, writable=True), required=True)
@_runtime_errors
def simulate_bm_cmd(profile, T, seed, replication, out):
    """Write one Brownian pair as CSV with columns t,x,y."""
    grid = TimeGrid(T)
    pair = simulate_bm_pair(_load_profile(profile, grid), grid, seed, replication)
    rows = np.column_stack([grid.times, pair.x, pair.y])
    np.savetxt(out, rows, fmt=["%d", _FLOAT_FMT, _FLOAT_FMT], delimiter=",",
               header="t,x,y", comments="")
    click.echo(f"wrote {out} (T={T})")


@simulate.command("gbm")
@click.option("--profile", required=True, help="Profile spec of the driving pair.")
@click.option("--T", "T", type=int, required=True, help="Grid length.")
@click.option("--sigma", type=float, required=True, callback=_positive,
              help="Volatility.")
@seed_option
@click.option("--replication", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False, writable=True), required=True)
@_runtime_errors
def simulate_gbm_cmd(profile, T, sigma, seed, replication, out):
    """Write one geometric pair as CSV with columns t,r,s,w,u."""
    grid = TimeGrid(T)
    pair = simulate_gbm_pair(
        simulate_bm_pair(_load_profile(profile, grid), grid, seed, replication), sigma
    )
    rows = np.column_stack([grid.times, pair.r_path, pair.s_path, pair.w, pair.u])
    np.savetxt(out, rows, fmt=["%d"] + [_FLOAT_FMT] * 4, delimiter=",",
               header="t,r,s,w,u", comments="")
    click.echo(f"wrote {out} (T={T})")


# ---------------------------------------------------------------------------
# estimate

def _read_csv_columns(path, expected: tuple) -> dict:
    data = np.genfromtxt(path, delimiter=",", names=True)
    missing = [c for c in expected if c not in (data.dtype.names or ())]
    if missing:
        raise click.ClickException(
            f"{path}: missing column(s) {', '.join(missing)}; expected header "
            + ",".join(expected)
        )
    return {c: np.atleast_1d(data[c]) for c in expected}


@main.group()
def estimate():
    """Run the estimators on path CSV files."""


@estimate.command("bm")
@click.option("--q", type=float, required=True, callback=_nonnegative,
              help="Amplification exponent.")
@click.option("--p", type=float, required=True, callback=_nonnegative,
              help="Damping exponent.")
@click.option("--u", "u_list", type=int, required=True, multiple=True,
              help="Evaluation time (repeatable).")
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False),
              required=True)
@click.option("--out", type=click.Path(dir_okay=False, writable=True), required=True)
@_runtime_errors
def estimate_bm_cmd(q, p, u_list, in_path, out):
    """Estimate at each requested time; CSV columns
    u,gamma_hat,sigma_x_sq,sigma_y_sq,rho_hat."""
    cols = _read_csv_columns(in_path, ("t", "x", "y"))
    params = bm.BmEstimatorParams(q, p)
    if not params.in_consistency_range():
        click.echo(f"note: (q={q}, p={p}) lies outside the consistency range", err=True)
    lines = ["u,gamma_hat,sigma_x_sq,sigma_y_sq,rho_hat"]
    for u in u_list:
        g = bm.gamma_hat_bm(cols["x"], cols["y"], u=u, params=params)
        sx = bm.sigma_sq_hat_bm(cols["x"], u=u, params=params)
        sy = bm.sigma_sq_hat_bm(cols["y"], u=u, params=params)
        rho = g / math.sqrt(sx * sy)
        lines.append(",".join([str(u)] + [_fmt(v) for v in (g, sx, sy, rho)]))
    Path(out).write_text("\n".join(lines) + "\n")
    click.echo(f"wrote {out} ({len(u_list)} row(s))")


@estimate.command("gbm")
@click.option("--variant", type=click.Choice(["v1", "v2"]), default="v1",
              show_default=True)
@click.option("--a", type=float, required=True)
@click.option("--b", type=float, required=True)
@click.option("--c", type=float, required=True)
@click.option("--sigma", type=float, required=True, callback=_positive)
@click.option("--t", "t_list", type=int, required=True, multiple=True,
              help="Evaluation time (repeatable).")
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False),
              required=True)
@click.option("--out", type=click.Path(dir_okay=False, writable=True), required=True)
@_runtime_errors
def estimate_gbm_cmd(variant, a, b, c, sigma, t_list, in_path, out):
    """Estimate at each requested time; CSV columns
    t,gamma_hat,sigma_w_sq,sigma_u_sq,rho_hat,flags."""
    cols = _read_csv_columns(in_path, ("t", "r", "s", "w", "u"))
    params = gbm.GbmEstimatorParams(a, b, c, sigma, variant)
    if not params.in_consistency_range():
        click.echo(
            f"note: (a={a}, b={b}, c={c}) lies outside the {variant} consistency range",
            err=True,
        )
    gamma_fn = gbm.gamma_hat_gbm_v1 if variant == "v1" else gbm.gamma_hat_gbm_v2
    lines = ["t,gamma_hat,sigma_w_sq,sigma_u_sq,rho_hat,flags"]
    for t in t_list:
        g = gamma_fn(cols["w"], cols["u"], t=t, params=params)
        sw = gbm.sigma_sq_hat_gbm(cols["w"], t=t, params=params)
        su = gbm.sigma_sq_hat_gbm(cols["u"], t=t, params=params)
        flags = []
        if sw < 0 or su < 0:
            flags.append("negative_variance")
        elif sw == 0 or su == 0:
            flags.append("degenerate_variance")
        rho = g / math.sqrt(sw * su) if not flags else float("nan")
        lines.append(",".join(
            [str(t)] + [_fmt(v) for v in (g, sw, su, rho)] + [";".join(flags)]
        ))
    Path(out).write_text("\n".join(lines) + "\n")
    click.echo(f"wrote {out} ({len(t_list)} row(s))")


# ---------------------------------------------------------------------------
# oracle

@main.group()
def oracle():
    """Print exact expectation values."""


@oracle.command("bm")
@click.option("--profile", required=True)
@click.option("--q", type=float, required=True)
@click.option("--p", type=float, required=True)
@click.option("--t", type=int, required=True)
@click.option("--T", "T", type=int, required=True)
@_runtime_errors
def oracle_bm_cmd(profile, q, p, t, T):
    """Expected gamma_hat, sigma_sq_hat and their ratio for a Brownian pair."""
    prof = _load_profile(profile, TimeGrid(T))
    params = bm.BmEstimatorParams(q, p)
    g = bm.expected_gamma_bm(prof, t, params, T)
    s = bm.expected_sigma_sq_bm(t, params, T)
    click.echo(f"expected_gamma {_fmt(g)}")
    click.echo(f"expected_sigma_sq {_fmt(s)}")
    click.echo(f"expected_ratio_q {_fmt(g / s)}")


@oracle.command("gbm")
@click.option("--variant", type=click.Choice(["v1", "v2"]), default="v1",
              show_default=True)
@click.option("--profile", required=True, help="Profile spec of the driving pair.")
@click.option("--a", type=float, required=True)
@click.option("--b", type=float, required=True)
@click.option("--c", type=float, required=True)
@click.option("--sigma", type=float, required=True)
@click.option("--t", type=int, required=True)
@click.option("--T", "T", type=int, required=True)
@_runtime_errors
def oracle_gbm_cmd(variant, profile, a, b, c, sigma, t, T):
    """Expected gamma_hat, sigma_sq_hat and their ratio for a geometric pair."""
    prof = _load_profile(profile, TimeGrid(T))
    params = gbm.GbmEstimatorParams(a, b, c, sigma, variant)
    if variant == "v1":
        g = gbm.expected_gamma_gbm_v1(prof, t, params, T)
        s = gbm.expected_sigma_sq_gbm_v1(t, params, T)
    else:
        g = gbm.expected_gamma_gbm_v2(prof, t, params, T)
        s = gbm.expected_sigma_sq_gbm_v2(t, params, T)
    click.echo(f"expected_gamma {_fmt(g)}")
    click.echo(f"expected_sigma_sq {_fmt(s)}")
    click.echo(f"expected_ratio {_fmt(g / s)}")


# ---------------------------------------------------------------------------
# vg

@main.group()
def vg():
    """Variance-gamma density and moments."""


_vg_options = [
    click.option("--r", type=float, required=True, help="Shape parameter."),
    click.option("--theta", type=float, required=True, help="Asymmetry."),
    click.option("--sigma", type=float, required=True, help="Scale."),
    click.option("--mu", type=float, required=True, help="Location."),
]


def _with_vg_options(fn):
    for opt in reversed(_vg_options):
        fn = opt(fn)
    return fn


@vg.command("pdf")
@_with_vg_options
@click.option("--x", type=float, required=True, multiple=True,
              help="Evaluation point (repeatable).")
@_runtime_errors
def vg_pdf_cmd(r, theta, sigma, mu, x):
    from .vg import VgParams, vg_pdf

    params = VgParams(r, theta, sigma, mu)
    for xi in x:
        click.echo(_fmt(vg_pdf(xi, params)))


@vg.command("moments")
@_with_vg_options
@_runtime_errors
def vg_moments_cmd(r, theta, sigma, mu):
    from .vg import VgParams, vg_moments

    mean, var = vg_moments(VgParams(r, theta, sigma, mu))
    click.echo(f"mean {_fmt(mean)}")
    click.echo(f"variance {_fmt(var)}")


# ---------------------------------------------------------------------------
# experiment

@main.group()
def experiment():
    """Seeded Monte Carlo experiment runs."""


def _parse_experiment_config(name: str, path: str, seed: int | None) -> ExperimentConfig:
    parser = configparser.ConfigParser()
    with open(path) as handle:
        parser.read_file(handle)
    if "experiment" not in parser:
        raise click.ClickException(f"{path}: missing [experiment] section")
    sec = parser["experiment"]
    try:
        t_list = tuple(int(v) for v in sec["T_list"].split(","))
        kwargs = dict(
            experiment=name,
            profile=sec.get("profile", None),
            T_list=t_list,
            t_eval=sec.getint("t_eval", t_list[0] if t_list else 1),
            reps=sec.getint("reps", 500),
            master_seed=(seed if seed is not None else sec.getint("seed", 0)),
            chunk_size=sec.getint("chunk_size", 256),
            n_jobs=sec.getint("n_jobs", 1),
        )
    except (KeyError, ValueError) as exc:
        raise click.ClickException(f"{path}: bad [experiment] section: {exc}") from exc
    params_sec = parser["params"] if "params" in parser else {}
    try:
        if name.startswith("bm_"):
            kwargs["params"] = bm.BmEstimatorParams(
                q=float(params_sec["q"]), p=float(params_sec["p"])
            )
        elif name.startswith("gbm_"):
            kwargs["params"] = gbm.GbmEstimatorParams(
                a=float(params_sec["a"]), b=float(params_sec["b"]),
                c=float(params_sec["c"]), sigma=float(params_sec["sigma"]),
                variant=params_sec.get("variant", "v1"),
            )
    except KeyError as exc:
        raise click.ClickException(f"{path}: missing [params] key {exc}") from exc
    return ExperimentConfig(**kwargs)


def _json_text(obj) -> str:
    """Deterministic JSON with fixed 17-significant-digit floats."""
    parts = []
    _write_json(obj, parts)
    return "".join(parts)


def _write_json(obj, parts):
    if isinstance(obj, dict):
        parts.append("{")
        for i, (key, value) in enumerate(obj.items()):
            if i:
                parts.append(", ")
            parts.append(json.dumps(str(key)))
            parts.append(": ")
            _write_json(value, parts)
        parts.append("}")
    elif isinstance(obj, (list, tuple)):
        parts.append("[")
        for i, value in enumerate(obj):
            if i:
                parts.append(", ")
            _write_json(value, parts)
        parts.append("]")
    elif isinstance(obj, bool) or obj is None:
        parts.append(json.dumps(obj))
    elif isinstance(obj, int):
        parts.append(str(obj))
    elif isinstance(obj, float):
        if math.isnan(obj):
            parts.append("NaN")
        elif math.isinf(obj):
            parts.append("Infinity" if obj > 0 else "-Infinity")
        else:
            parts.append(_fmt(obj))
    else:
        parts.append(json.dumps(str(obj)))


def _curves_rows(cells) -> list:
    """Flatten report cells into (T, statistic, value) rows."""
    rows = []
    for cell in cells:
        label = cell.get("T", cell.get("t", ""))
        for key, value in cell.items():
            if key in ("T", "t"):
                continue
            if isinstance(value, dict):
                for sub, v in value.items():
                    if isinstance(v, (int, float)):
                        rows.append((label, f"{key}_{sub}", float(v)))
            elif isinstance(value, (int, float)):
                rows.append((label, key, float(value)))
    return rows


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


@experiment.command("run")
@click.option("--name", type=click.Choice(EXPERIMENTS), required=True)
@click.option("--config", "config_path",
              type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
@click.option("--seed", type=int, default=None, envvar="DYNCORR_SEED",
              help="Master seed override (env DYNCORR_SEED).")
@click.pass_context
@_runtime_errors
def experiment_run_cmd(ctx, name, config_path, out_dir, seed):
    """Run one experiment; write report.json, curves.csv and manifest.json.

    Exits 3 when any assertion in the report fails.
    """
    config = _parse_experiment_config(name, config_path, seed)
    report = run_experiment(config)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    # report.json must be byte-identical across reruns; wall-clock data
    # lives in the manifest instead
    report_dict = report.to_dict()
    runtime_s = report_dict.pop("runtime_s")
    report_path = out / "report.json"
    report_path.write_text(_json_text(report_dict) + "\n")

    curves_path = out / "curves.csv"
    curve_lines = ["T,statistic,value"] + [
        f"{label},{stat},{_fmt(value)}" for label, stat, value in _curves_rows(report.cells)
    ]
    curves_path.write_text("\n".join(curve_lines) + "\n")

    manifest = {
        "tool": "dyncorr",
        "version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "runtime_s": runtime_s,
        "experiment": name,
        "config": {
            "file": os.path.basename(config_path),
            "profile": (config.profile.spec_string() if config.profile else None),
            "T_list": list(config.T_list),
            "t_eval": config.t_eval,
            "reps": config.reps,
            "params": (vars(config.params) if config.params is not None else None),
            "master_seed": config.master_seed,
            "chunk_size": config.chunk_size,
            "n_jobs": config.n_jobs,
        },
        "seeds": {"master_seed": config.master_seed,
                  "replications": [0, config.reps - 1]},
        "files": {
            path.name: _sha256(path) for path in (report_path, curves_path)
        },
    }
    (out / "manifest.json").write_text(_json_text(manifest) + "\n")

    status = "PASS" if report.all_passed else "FAIL"
    for check in report.checks:
        click.echo(f"{'PASS' if check.passed else 'FAIL'} {check.name}")
    click.echo(f"{status} {name} ({len(report.checks)} checks) -> {out}")
    if not report.all_passed:
        ctx.exit(3)


if __name__ == "__main__":
    main()
