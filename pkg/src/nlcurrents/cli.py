"""Batch experiment runner.

``nlcurrents run <config>`` executes one experiment described by a JSON
config and writes CSV (or JSON) data plus a manifest; ``nlcurrents verify
<config>`` re-runs the experiment's invariant checks and prints a verdict
table.  Outputs are deterministic: fixed seeds, fixed eigenvector gauge,
fixed float formatting, and grid-ordered merging of parallel results.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import sys
import traceback
from concurrent.futures import ProcessPoolExecutor
from importlib import resources

import click
import numpy as np

from . import __version__, presets
from .currents import StateVector, constancy_deviation, nlc_field
from .floquet import floquet_modes, period_averaged_nlc, zero_sum_check
from .lattice import build_model
from .scattering import (classify_resonance, find_ptr, pt_unitarity_residual,
                         s_matrix, scattering_nlc, solve_scattering)
from .spectral import eigenmodes, invariance_report
from .symmetry import (SymmetryTransform, detect_maximal_domains,
                       symmetry_residual)

EXPERIMENTS = ("eigen_report", "symmetry_scan", "pt_sweep",
               "floquet_report", "scattering_sweep", "ptr_search")


class ConfigError(ValueError):
    """Malformed experiment config."""


# -- config handling --------------------------------------------------------

def load_config(path: str) -> tuple[dict, bytes]:
    """Read a config from a path or from the bundled config directory."""
    raw = None
    if os.path.exists(path):
        with open(path, "rb") as fh:
            raw = fh.read()
    else:
        name = os.path.basename(path)
        ref = resources.files("nlcurrents").joinpath("configs", name)
        if ref.is_file():
            raw = ref.read_bytes()
    if raw is None:
        raise ConfigError(f"config {path!r} not found")
    try:
        cfg = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    if cfg.get("experiment") not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {EXPERIMENTS}")
    return cfg, raw


def _grid(cfg: dict, key: str, required: bool = True):
    g = cfg.get("grid", {}).get(key)
    if g is None:
        if required:
            raise ConfigError(f"missing grid.{key}")
        return None
    if isinstance(g, dict):
        arr = np.linspace(float(g["start"]), float(g["stop"]), int(g["num"]))
    else:
        arr = np.asarray([float(x) for x in g], dtype=float)
    if arr.size == 0 or not np.all(np.isfinite(arr)):
        raise ConfigError(f"grid.{key} must be nonempty and finite")
    return arr


def _build_model(cfg: dict, **extra):
    if "preset" in cfg:
        spec = cfg["preset"]
        params = dict(spec.get("params", {}))
        params.update(extra)
        return presets.preset(spec["name"], **params)
    if "model" in cfg:
        if extra:
            raise ConfigError("grid sweeps require a preset model family")
        return build_model(cfg["model"])
    raise ConfigError("config needs a 'preset' or 'model' entry")


def _transforms(cfg: dict) -> list[SymmetryTransform]:
    out = []
    for spec in cfg.get("transforms", []):
        kind = spec["kind"]
        kwargs = dict(d_lo=int(spec["d_lo"]), d_hi=int(spec["d_hi"]),
                      with_time_reversal=bool(spec.get("with_T", False)))
        if kind == "inversion":
            kwargs["center2"] = int(spec["center2"])
        else:
            kwargs["shift"] = int(spec["shift"])
        out.append(SymmetryTransform(kind, **kwargs))
    return out


def _n_threads(threads: int | None) -> int:
    env = os.environ.get("NLC_THREADS")
    if env is not None:
        return max(1, int(env))
    return max(1, threads or 1)


def _pmap(fn, items, threads: int):
    """Map preserving item order; parallel over grid points when
    threads > 1 (within-point work stays sequential)."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# -- deterministic serialization --------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    return str(x)


def write_rows(rows: list[dict], out_path: str, fmt: str) -> None:
    if not rows:
        header: list[str] = []
    else:
        header = list(rows[0].keys())
    if fmt == "json":
        payload = [{k: (float(v) if isinstance(v, (np.floating, float))
                        else (int(v) if isinstance(v, (np.integer, int))
                              else v)) for k, v in row.items()}
                   for row in rows]
        with open(out_path, "w") as fh:
            json.dump(payload, fh, indent=1, sort_keys=False)
            fh.write("\n")
        return
    with open(out_path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row[k]) for k in header) + "\n")


def write_manifest(out_dir: str, prefix: str, raw: bytes, checks: dict,
                   status: str, error: str | None = None) -> str:
    manifest = {
        "config_sha256": hashlib.sha256(raw).hexdigest(),
        "package": "nlcurrents",
        "version": __version__,
        "numpy": np.__version__,
        "python": sys.version.split()[0],
        "status": status,
        "checks": checks,
    }
    if error is not None:
        manifest["error"] = error
    path = os.path.join(out_dir, f"{prefix}_manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return path


# -- experiments ------------------------------------------------------------

def _run_eigen_report(cfg, threads):
    model = _build_model(cfg)
    sol = eigenmodes(model)
    rows = []
    transforms = _transforms(cfg)
    for k in range(sol.energies.size):
        row = {"mode": k,
               "re_E": sol.energies[k].real, "im_E": sol.energies[k].imag,
               "degenerate": bool(sol.degenerate[k]),
               "residual": sol.residual}
        rows.append(row)
    checks = {"eigen_residual_below_1e-10": bool(sol.residual <= 1e-10
                                                 * max(1.0, _hnorm(model)))}
    for i, t in enumerate(transforms):
        rep = invariance_report(model, t, sol)
        for k, mi in enumerate(rep):
            rows[k][f"re_q_plus_{i}"] = mi.q_plus_value.real
            rows[k][f"im_q_plus_{i}"] = mi.q_plus_value.imag
            rows[k][f"constancy_{i}"] = mi.constancy_plus
    return rows, checks


def _hnorm(model) -> float:
    return max([abs(v) for v in model.onsite]
               + [abs(h) for h in model.hop_up]
               + [abs(h) for h in model.hop_down] + [1.0])


def _run_symmetry_scan(cfg, threads):
    model = _build_model(cfg)
    rows = []
    for kind in ("inversion", "translation"):
        for with_t in (False, True):
            for t in detect_maximal_domains(model, kind, with_t):
                rows.append({
                    "kind": kind, "with_T": with_t,
                    "d_lo": t.d_lo, "d_hi": t.d_hi,
                    "center2": t.center2 if t.center2 is not None else -1,
                    "shift": t.shift if t.shift is not None else 0,
                    "residual": symmetry_residual(model, t),
                })
    checks = {"all_residuals_below_tol": all(r["residual"] <= 1e-12
                                             * _hnorm(model) for r in rows)}
    return rows, checks


def _pt_point(args):
    cfg, gamma = args
    model = _build_model(cfg, gamma=gamma)
    sol = eigenmodes(model)
    transforms = _transforms(cfg)
    rows = []
    for k in range(sol.energies.size):
        row = {"gamma": gamma, "mode": k,
               "re_E": sol.energies[k].real, "im_E": sol.energies[k].imag}
        for i, t in enumerate(transforms):
            field = nlc_field(model, sol.state(k), t)
            Q = np.sum(field.q_plus[t.d_lo - 1:t.d_hi])
            row[f"re_Q_{i}"] = Q.real
            row[f"im_Q_{i}"] = Q.imag
        rows.append(row)
    return rows


def _run_pt_sweep(cfg, threads):
    gammas = _grid(cfg, "gamma")
    chunks = _pmap(_pt_point, [(cfg, float(g)) for g in gammas], threads)
    rows = [row for chunk in chunks for row in chunk]
    n_real_max = 0
    for g in gammas:
        sub = [r for r in rows if r["gamma"] == g]
        n_real_max = max(n_real_max,
                         sum(1 for r in sub if abs(r["im_E"]) < 1e-10))
    checks = {"fully_real_window_exists":
              bool(n_real_max == max(r["mode"] for r in rows) + 1)}
    return rows, checks


def _run_floquet_report(cfg, threads):
    driven = _build_model(cfg)
    harmonics = int(cfg.get("harmonics", 6))
    sol = floquet_modes(driven, harmonics=harmonics)
    transforms = _transforms(cfg)
    rows = []
    worst_const = 0.0
    worst_zero = 0.0
    for k in range(sol.n_modes):
        row = {"mode": k, "quasienergy": sol.quasienergies[k].real,
               "im_quasienergy": sol.quasienergies[k].imag,
               "zero_weight": sol.zero_weights[k]}
        for i, t in enumerate(transforms):
            qp, qm = period_averaged_nlc(driven, sol, k, t)
            links = qp[t.d_lo - 1:t.d_hi - 1]
            dev = constancy_deviation(links)
            row[f"re_qbar_{i}"] = float(np.median(links.real))
            row[f"im_qbar_{i}"] = float(np.median(links.imag))
            row[f"constancy_{i}"] = dev
            worst_const = max(worst_const, dev)
            worst_zero = max(worst_zero,
                             zero_sum_check(qp, qm, (t.d_lo, t.d_hi)))
        rows.append(row)
    checks = {"period_averaged_constancy_1e-6": bool(worst_const < 1e-6),
              "zero_sum_below_1e-6": bool(worst_zero < 1e-6)}
    return rows, checks


def _scatter_point(args):
    cfg, k, gamma_b = args
    extra = {} if gamma_b is None else {"gamma_b": gamma_b}
    model = _build_model(cfg, **extra)
    s = s_matrix(model, k)
    state = solve_scattering(model, k, 1.0, 0.0)
    row = {"k": k}
    if gamma_b is not None:
        row["gamma_b"] = gamma_b
    row.update({
        "re_t": s.t.real, "im_t": s.t.imag,
        "re_r": s.r.real, "im_r": s.r.imag,
        "transmittance": s.transmittance(),
        "unitarity_defect": pt_unitarity_residual(s),
    })
    lead = model.boundary
    for i, alpha2 in enumerate(cfg.get("domain_centers2", [])):
        # NLC of the local inversion domain, from interior amplitudes
        t = SymmetryTransform("inversion", int(cfg["domains"][i][0]),
                              int(cfg["domains"][i][1]),
                              center2=int(alpha2), with_time_reversal=True)
        field = nlc_field(model, StateVector(state.amplitudes), t)
        q = np.median(field.q_plus[t.d_lo - 1:t.d_hi - 1].imag) * 1j \
            + np.median(field.q_plus[t.d_lo - 1:t.d_hi - 1].real)
        row[f"re_q_{i}"] = q.real
        row[f"im_q_{i}"] = q.imag
        row[f"constancy_{i}"] = constancy_deviation(
            field.q_plus[t.d_lo - 1:t.d_hi - 1])
    if lead is not None and "global_center2" in cfg:
        row["re_q_global"] = scattering_nlc(
            state, int(cfg["global_center2"]), lead).real
        row["im_q_global"] = scattering_nlc(
            state, int(cfg["global_center2"]), lead).imag
    return row


def _run_scattering_sweep(cfg, threads):
    ks = _grid(cfg, "k")
    gbs = _grid(cfg, "gamma_b", required=False)
    points = []
    if gbs is None:
        points = [(cfg, float(k), None) for k in ks]
    else:
        for g in gbs:
            for k in ks:
                points.append((cfg, float(k), float(g)))
    rows = _pmap(_scatter_point, points, threads)
    worst = max(r.get("constancy_0", 0.0) for r in rows) if rows else 0.0
    checks = {"domain_constancy_below_1e-10": bool(worst < 1e-10)}
    return rows, checks


def _run_ptr_search(cfg, threads):
    model = _build_model(cfg)
    n_scan = int(cfg.get("n_scan", 2000))
    center2 = cfg.get("global_center2")
    resonances = find_ptr(model, n_scan=n_scan,
                          polish_center2=None if center2 is None
                          else int(center2))
    domains = [tuple(int(x) for x in d) for d in cfg.get("domains", [])]
    rows = []
    for r in resonances:
        if domains:
            r = classify_resonance(model, r, domains)
        rows.append({"k": r.k, "energy": r.energy,
                     "transmission_defect": r.transmission_defect,
                     "symmetric": r.symmetric})
    checks = {"found_resonances": bool(rows)}
    return rows, checks


_RUNNERS = {
    "eigen_report": _run_eigen_report,
    "symmetry_scan": _run_symmetry_scan,
    "pt_sweep": _run_pt_sweep,
    "floquet_report": _run_floquet_report,
    "scattering_sweep": _run_scattering_sweep,
    "ptr_search": _run_ptr_search,
}


# -- CLI --------------------------------------------------------------------

@click.group()
def main():
    """Nonlocal-current experiments on 1D tight-binding arrays."""


@main.command("run")
@click.argument("config_path")
@click.option("--out", "out_dir", default=".", show_default=True,
              help="Output directory.")
@click.option("--threads", default=1, show_default=True,
              help="Worker processes over grid points "
                   "(NLC_THREADS overrides).")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
              default="csv", show_default=True)
def run_cmd(config_path, out_dir, threads, fmt):
    """Run the experiment described by CONFIG_PATH."""
    sys.exit(run(config_path, out_dir, threads, fmt))


def run(config_path: str, out_dir: str = ".", threads: int = 1,
        fmt: str = "csv") -> int:
    try:
        cfg, raw = load_config(config_path)
    except (ConfigError, KeyError, TypeError, ValueError) as exc:
        click.echo(f"config error: {exc}", err=True)
        return 2
    os.makedirs(out_dir, exist_ok=True)
    prefix = cfg.get("output_prefix",
                     os.path.splitext(os.path.basename(config_path))[0])
    try:
        rows, checks = _RUNNERS[cfg["experiment"]](cfg, _n_threads(threads))
    except Exception as exc:  # noqa: BLE001 - converted to exit code
        err = {"error": type(exc).__name__, "message": str(exc),
               "traceback": traceback.format_exc()}
        with open(os.path.join(out_dir, f"{prefix}_error.json"), "w") as fh:
            json.dump(err, fh, indent=1)
            fh.write("\n")
        write_manifest(out_dir, prefix, raw, {}, "error",
                       f"{type(exc).__name__}: {exc}")
        click.echo(f"experiment failed: {exc}", err=True)
        return 1
    ext = "csv" if fmt == "csv" else "json"
    data_path = os.path.join(out_dir, f"{prefix}.{ext}")
    write_rows(rows, data_path, fmt)
    write_manifest(out_dir, prefix, raw, checks, "ok")
    click.echo(f"wrote {data_path} ({len(rows)} rows)")
    return 0


@main.command("verify")
@click.argument("config_path")
@click.option("--out", "out_dir", default=".", show_default=True)
@click.option("--threads", default=1, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
              default="csv", show_default=True)
def verify_cmd(config_path, out_dir, threads, fmt):
    """Re-run the invariant checks of CONFIG_PATH and print a verdict
    table."""
    sys.exit(verify(config_path, out_dir, threads))


def verify(config_path: str, out_dir: str = ".", threads: int = 1) -> int:
    try:
        cfg, raw = load_config(config_path)
    except (ConfigError, KeyError, TypeError, ValueError) as exc:
        click.echo(f"config error: {exc}", err=True)
        return 2
    os.makedirs(out_dir, exist_ok=True)
    prefix = cfg.get("output_prefix",
                     os.path.splitext(os.path.basename(config_path))[0])
    expected = cfg.get("expected_checks", {})
    try:
        _, checks = _RUNNERS[cfg["experiment"]](cfg, _n_threads(threads))
    except Exception as exc:  # noqa: BLE001
        write_manifest(out_dir, prefix, raw, {}, "error",
                       f"{type(exc).__name__}: {exc}")
        click.echo(f"experiment failed: {exc}", err=True)
        return 1
    click.echo(f"{'check':<40} {'verdict':<18}")
    ok = True
    verdicts = {}
    for name, passed in checks.items():
        want = bool(expected.get(name, True))
        if passed:
            verdict = "PASS" if want else "PASS-unexpected"
        else:
            verdict = "FAIL-as-expected" if not want else "FAIL"
        if verdict in ("FAIL", "PASS-unexpected"):
            ok = False
        verdicts[name] = verdict
        click.echo(f"{name:<40} {verdict:<18}")
    write_manifest(out_dir, prefix, raw, verdicts,
                   "ok" if ok else "failed")
    return 0 if ok else 1


if __name__ == "__main__":
    main()
