"""Command-line driver: config parsing, experiments, deterministic artifacts.

Configuration is a flat INI file (sections of key=value pairs); unknown
sections or keys are rejected.  Every value can be overridden through
environment variables named ``CGLB_<SECTION>__<KEY>``.  All CSV and JSON
artifacts are byte-stable for a fixed (config, seed) pair: floats are
written with 17 significant digits and JSON keys are sorted.
"""

from __future__ import annotations

import argparse
import configparser
import itertools
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import dispersion, littlewood_paley as lp, perturbation, solver
from .model import (
    NoRealSolution,
    PlaneWave,
    PlaneWaveFamily,
    SystemParams,
    solve_plane_wave,
)
from .spectral import Grid, band_limited_noise

ENV_PREFIX = "CGLB_"

_TWO_PI = 2.0 * np.pi

# section -> key -> (type tag, default); REQUIRED-less: everything defaulted.
SCHEMA: dict[str, dict[str, tuple[str, object]]] = {
    "model": {
        "u0": ("float", 0.0),
        "u1": ("float", 0.0),
        "v0": ("float", 0.0),
        "v1": ("float", 0.0),
        "xi": ("float", 1.0),
        "m": ("float", 1.0),
        "kappa0": ("float", 0.0),
        "kappa1": ("float", 0.0),
        "s1_0": ("float", 0.0),
        "s1_1": ("float", 0.0),
        "s2_0": ("float", 0.0),
        "s2_1": ("float", 0.0),
    },
    "wave": {
        "r0": ("optfloat", None),
        "theta0": ("optfloat", None),
        "w0": ("float", 0.0),
        "branch": ("optint", None),
        "drift_compatibility": ("bool", False),
    },
    "grid": {
        "dim": ("int", 1),
        "n": ("int", 256),
        "length": ("float", _TWO_PI),
    },
    "solver": {
        "dt": ("float", 1e-3),
        "t_end": ("float", 1.0),
        "scheme": ("str", "exponential-rk2"),
        "dealias": ("bool", True),
        "cadence": ("int", 10),
        "blowup": ("float", 1e6),
        "k_cutoff": ("optfloat", None),
        "hs_exponent": ("float", 1.0),
        "besov_p": ("float", 2.0),
    },
    "dispersion": {
        "k_extent": ("float", 16.0),
        "samples": ("int", 1024),
        "coupling": ("str", "kappa_zero"),
    },
    "scan": {
        "m": ("floatlist", None),
        "w0": ("floatlist", None),
        "u0": ("floatlist", None),
        "v0": ("floatlist", None),
        "kappa0": ("floatlist", None),
        "s1_0": ("floatlist", None),
        "s2_0": ("floatlist", None),
    },
    "experiment": {
        "amp": ("float", 1e-6),
        "k_seed": ("float", 2.0),
        "s": ("float", 1.0),
        "eps_list": ("floatlist", [1e-1, 1e-2, 1e-3, 1e-4]),
        "directions": ("int", 5),
        "init_modes": ("int", 4),
    },
    "besov": {
        "n": ("int", 64),
        "p": ("float", 2.0),
        "mu": ("float", 1.0),
        "u_disp": ("float", 0.0),
        "q_list": ("floatlist", [1.0, 2.0, 3.0, 4.0]),
        "cases": ("int", 50),
        "ratio_ceiling": ("float", 4.0),
    },
}


class ConfigError(ValueError):
    pass


def _convert(tag: str, raw: str):
    if tag == "float":
        return float(raw)
    if tag == "optfloat":
        return None if raw.strip() == "" else float(raw)
    if tag == "int":
        return int(raw)
    if tag == "optint":
        return None if raw.strip() == "" else int(raw)
    if tag == "bool":
        value = raw.strip().lower()
        if value in ("true", "1", "yes", "on"):
            return True
        if value in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"not a boolean: {raw!r}")
    if tag == "str":
        return raw.strip()
    if tag == "floatlist":
        return [float(tok) for tok in raw.split(",") if tok.strip() != ""]
    raise ConfigError(f"unknown schema tag {tag}")


def load_config(path: str | None, environ: dict | None = None) -> dict:
    """Parse and validate a config file plus environment overrides."""
    cfg = {sec: {k: default for k, (_, default) in keys.items()} for sec, keys in SCHEMA.items()}
    if path is not None:
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise ConfigError(f"config file not found: {path}")
        for section in parser.sections():
            if section not in SCHEMA:
                raise ConfigError(f"unknown config section [{section}]")
            for key, raw in parser.items(section):
                if key not in SCHEMA[section]:
                    raise ConfigError(f"unknown key {key!r} in section [{section}]")
                tag = SCHEMA[section][key][0]
                cfg[section][key] = _convert(tag, raw)
    environ = os.environ if environ is None else environ
    for name, raw in sorted(environ.items()):
        if not name.startswith(ENV_PREFIX):
            continue
        body = name[len(ENV_PREFIX):]
        if "__" not in body:
            raise ConfigError(f"malformed override {name}; use {ENV_PREFIX}SECTION__KEY")
        section, key = body.split("__", 1)
        section, key = section.lower(), key.lower()
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ConfigError(f"override {name} does not match any config key")
        cfg[section][key] = _convert(SCHEMA[section][key][0], raw)
    return cfg


def params_from_config(cfg: dict) -> SystemParams:
    m = cfg["model"]
    return SystemParams(
        u_coeffs=(m["u0"], m["u1"]),
        v_coeffs=(m["v0"], m["v1"]),
        xi=m["xi"],
        m=m["m"],
        kappa_coeffs=(m["kappa0"], m["kappa1"]),
        s1_coeffs=(m["s1_0"], m["s1_1"]),
        s2_coeffs=(m["s2_0"], m["s2_1"]),
    )


def wave_from_config(cfg: dict, params: SystemParams) -> PlaneWave:
    w = cfg["wave"]
    if w["r0"] is not None:
        theta0 = w["theta0"]
        if theta0 is None:
            theta0 = float(np.sqrt(max(1.0 - w["r0"] ** 2, 0.0)))
        return PlaneWave(r0=w["r0"], theta0=theta0, w0=w["w0"])
    result = solve_plane_wave(
        params,
        branch=w["branch"],
        w0=w["w0"],
        drift_compatibility=w["drift_compatibility"],
    )
    if isinstance(result, PlaneWaveFamily):
        return result.representative()
    return result


def grid_from_config(cfg: dict) -> Grid:
    g = cfg["grid"]
    return Grid(dim=g["dim"], n=g["n"], length=g["length"])


def solver_config_from_config(cfg: dict) -> solver.SolverConfig:
    s = cfg["solver"]
    return solver.SolverConfig(
        dt=s["dt"],
        t_end=s["t_end"],
        scheme=s["scheme"],
        dealias=s["dealias"],
        cadence=s["cadence"],
        blowup_threshold=s["blowup"],
        k_cutoff=s["k_cutoff"],
        hs_exponent=s["hs_exponent"],
        besov_p=s["besov_p"],
    )


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return f"{float(x):.17g}"


def write_csv(path: Path, schema: str, header: list[str], rows) -> None:
    lines = [f"# schema={schema}", ",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def write_json(path: Path, schema: str, payload: dict) -> None:
    doc = {"schema": schema}
    doc.update(payload)
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def _fail_json(message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": message, "exit_code": code}) + "\n")
    return code


def _slice_summary(cfg: dict, wave: PlaneWave) -> dict:
    model = cfg["model"]
    return {
        "r0": wave.r0,
        "theta0": wave.theta0,
        "w0": wave.w0,
        "m": model["m"],
        "u": [model["u0"], model["u1"]],
        "v": [model["v0"], model["v1"]],
        "kappa": [model["kappa0"], model["kappa1"]],
    }


def cmd_simulate(cfg: dict, out: Path, seed: int, threads: int) -> int:
    params = params_from_config(cfg)
    grid = grid_from_config(cfg)
    sconf = solver_config_from_config(cfg)
    state = solver.FieldState.zeros(grid)
    w = cfg["wave"]
    if w["r0"] is not None or w["theta0"] is not None:
        wave = wave_from_config(cfg, params)
        pst = perturbation.PerturbationState.zeros(Grid(1, grid.n, grid.length))
        if grid.dim == 1:
            P, omega = perturbation.compose_polar(wave, pst)
            state = solver.FieldState(P=P, omega=(omega,), t=0.0)
    status = "completed"
    try:
        summary = solver.evolve(state, params, solver.Forcing.zero(), sconf)
        rows = summary.rows
    except solver.StepUnstable as exc:
        status = f"unstable@{exc.t:.6g}"
        rows = []
    header = ["t", "L2_P", "L2_Omega", "Hs_P", "Hs_Omega", "besov_proxy"]
    write_csv(
        out / "diagnostics.csv",
        "cglb.diagnostics.v1",
        header,
        ([row[h] for h in header] for row in rows),
    )
    write_json(out / "summary.json", "cglb.summary.v1", {"status": status, "seed": seed})
    return 0


def cmd_dispersion(cfg: dict, out: Path, seed: int, threads: int) -> int:
    params = params_from_config(cfg)
    wave = wave_from_config(cfg, params)
    d = cfg["dispersion"]
    mats = dispersion.build_matrices(params, wave, d["coupling"])
    ks = dispersion.default_k_grid(d["k_extent"], d["samples"])
    lams = dispersion.spectrum_table(mats, ks)
    rows = (
        [k, l[0].real, l[0].imag, l[1].real, l[1].imag, l[2].real, l[2].imag]
        for k, l in zip(ks, lams)
    )
    write_csv(
        out / "spectrum.csv",
        "cglb.spectrum.v1",
        ["k", "re1", "im1", "re2", "im2", "re3", "im3"],
        rows,
    )
    samples = [dispersion.SpectrumSample(k=float(k), lambdas=l) for k, l in zip(ks, lams)]
    verdict = dispersion.classify_spectrum(samples)
    write_json(out / "verdict.json", "cglb.verdict.v1", verdict.to_json_dict())
    return 0


def _scan_jobs(cfg: dict):
    model = cfg["model"]
    scan = cfg["scan"]
    axes = []
    for key in ("m", "w0", "u0", "v0", "kappa0", "s1_0", "s2_0"):
        values = scan[key]
        if values is None:
            base = cfg["wave"]["w0"] if key == "w0" else model.get(key, 0.0)
            values = [base]
        axes.append([(key, v) for v in values])
    return [dict(combo) for combo in itertools.product(*axes)]


def cmd_stability_scan(cfg: dict, out: Path, seed: int, threads: int) -> int:
    d = cfg["dispersion"]
    jobs = _scan_jobs(cfg)
    ks = dispersion.default_k_grid(d["k_extent"], d["samples"])

    def run(job: dict):
        model = dict(cfg["model"])
        model.update({k: v for k, v in job.items() if k != "w0"})
        params = SystemParams(
            u_coeffs=(model["u0"], model["u1"]),
            v_coeffs=(model["v0"], model["v1"]),
            xi=model["xi"],
            m=model["m"],
            kappa_coeffs=(model["kappa0"], model["kappa1"]),
            s1_coeffs=(model["s1_0"], model["s1_1"]),
            s2_coeffs=(model["s2_0"], model["s2_1"]),
        )
        try:
            result = solve_plane_wave(params, branch=None, w0=job["w0"])
            wave = (
                result.representative()
                if isinstance(result, PlaneWaveFamily)
                else result
            )
        except (NoRealSolution, ValueError):
            return job, None, None
        mats = dispersion.build_matrices(params, wave, d["coupling"])
        lams = dispersion.spectrum_table(mats, ks)
        samples = [
            dispersion.SpectrumSample(k=float(k), lambdas=l) for k, l in zip(ks, lams)
        ]
        return job, wave, dispersion.classify_spectrum(samples)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]

    header = [
        "m",
        "w0",
        "u0",
        "v0",
        "kappa0",
        "s1_0",
        "s2_0",
        "r0",
        "theta0",
        "verdict",
        "C",
        "omega_plus",
        "band_lo",
        "band_hi",
    ]
    rows = []
    for job, wave, verdict in results:
        base = [job[k] for k in ("m", "w0", "u0", "v0", "kappa0", "s1_0", "s2_0")]
        if verdict is None:
            rows.append(base + ["nan", "nan", "no_wave", "nan", "nan", "nan", "nan"])
            continue
        c = verdict.parabola_constant
        rows.append(
            base
            + [
                wave.r0,
                wave.theta0,
                verdict.kind,
                "inf" if c is not None and np.isinf(c) else ("nan" if c is None else c),
                "nan" if verdict.omega_plus is None else verdict.omega_plus,
                "nan" if verdict.unstable_band is None else verdict.unstable_band[0],
                "nan" if verdict.unstable_band is None else verdict.unstable_band[1],
            ]
        )
    write_csv(out / "atlas.csv", "cglb.atlas.v1", header, rows)
    return 0


def cmd_decay_fit(cfg: dict, out: Path, seed: int, threads: int) -> int:
    params = params_from_config(cfg)
    wave = wave_from_config(cfg, params)
    grid = Grid(dim=1, n=cfg["grid"]["n"], length=cfg["grid"]["length"])
    sconf = solver_config_from_config(cfg)
    exp = cfg["experiment"]
    rng = np.random.default_rng(seed)
    n = grid.n
    modes = exp["init_modes"]
    hats = np.zeros((n // 2 + 1, 3), dtype=complex)
    hats[1 : modes + 1] = exp["amp"] * (
        rng.normal(size=(modes, 3)) + 1j * rng.normal(size=(modes, 3))
    )
    fields = tuple(np.fft.irfft(hats[:, i] * n, n=n) for i in range(3))
    pi0 = perturbation.PerturbationState(
        grid=grid, rho=fields[0], phi=fields[1], h=fields[2]
    )
    report = perturbation.decay_experiment(params, wave, pi0, exp["s"], sconf)
    payload = {"slice": _slice_summary(cfg, wave)}
    payload.update(report.to_json_dict())
    write_json(out / "decay.json", "cglb.decay.v1", payload)
    write_csv(
        out / "decay_series.csv",
        "cglb.decay_series.v1",
        ["t", "hs_norm"],
        zip(report.times, report.norms),
    )
    return 0 if report.passed else 2


def cmd_instability(cfg: dict, out: Path, seed: int, threads: int) -> int:
    params = params_from_config(cfg)
    wave = wave_from_config(cfg, params)
    grid = Grid(dim=1, n=cfg["grid"]["n"], length=cfg["grid"]["length"])
    sconf = solver_config_from_config(cfg)
    exp = cfg["experiment"]
    report = perturbation.instability_experiment(
        params, wave, exp["k_seed"], exp["amp"], sconf, grid=grid
    )
    payload = {"slice": _slice_summary(cfg, wave)}
    payload.update(report.to_json_dict())
    write_json(out / "growth.json", "cglb.growth.v1", payload)
    write_csv(
        out / "growth_series.csv",
        "cglb.growth_series.v1",
        ["t", "mode_amplitude"],
        zip(report.times, report.amplitudes),
    )
    return 0 if report.passed else 2


def cmd_besov_check(cfg: dict, out: Path, seed: int, threads: int) -> int:
    b = cfg["besov"]
    grid = Grid(dim=1, n=b["n"], length=_TWO_PI)
    rng = np.random.default_rng(seed)
    part = lp.partition_for(grid)
    dev_nh, dev_h = part.partition_deviation()
    qmin, qmax = part.quadratic_sum_bounds()

    u = band_limited_noise(grid, rng, max_index=grid.n // 8, real=True)
    v = band_limited_noise(grid, rng, max_index=grid.n // 8, real=True)
    tuv, tvu, ruv = lp.bony_split(u, v)
    product = u.physical() * v.physical()
    bony_err = float(
        np.max(np.abs(tuv.physical() + tvu.physical() + ruv.physical() - product))
    )

    t_grid = np.linspace(0.0, 0.1, 9)
    decay_reports = []
    for q in b["q_list"]:
        rep = lp.check_semigroup_decay(
            grid, int(q), b["mu"], b["u_disp"], t_grid, p=b["p"], rng=rng
        )
        decay_reports.append(rep.to_json_dict())

    ratios = []
    for _ in range(b["cases"]):
        f0 = band_limited_noise(grid, rng, max_index=grid.n // 4, zero_mean=True)
        idx = lp.BesovIndex(s=0.0, p=2.0, r=1.0, rho=1.0, homogeneous=True)
        rep = lp.check_smoothing_estimate(f0, None, b["mu"], b["u_disp"], idx, rho1=1.0)
        ratios.append(rep.ratio)
    max_ratio = max(ratios) if ratios else 0.0

    passed = (
        dev_nh <= 1e-12
        and dev_h <= 1e-12
        and bony_err <= 1e-10
        and all(rep["pass"] for rep in decay_reports)
        and max_ratio <= b["ratio_ceiling"]
    )
    write_json(
        out / "besov_report.json",
        "cglb.besov.v1",
        {
            "partition_deviation_nonhomogeneous": dev_nh,
            "partition_deviation_homogeneous": dev_h,
            "quadratic_sum_min": qmin,
            "quadratic_sum_max": qmax,
            "bony_identity_error": bony_err,
            "semigroup_decay": decay_reports,
            "smoothing_ratio_max": max_ratio,
            "ratio_ceiling_calibrated": True,
            "ratio_ceiling": b["ratio_ceiling"],
            "pass": passed,
        },
    )
    return 0 if passed else 2


def cmd_quadratic_check(cfg: dict, out: Path, seed: int, threads: int) -> int:
    params = params_from_config(cfg)
    wave = wave_from_config(cfg, params)
    grid = Grid(dim=1, n=cfg["grid"]["n"], length=cfg["grid"]["length"])
    exp = cfg["experiment"]
    rng = np.random.default_rng(seed)
    n = grid.n
    reports = []
    all_pass = True
    for _ in range(exp["directions"]):
        hats = np.zeros((n // 2 + 1, 3), dtype=complex)
        hats[1:5] = rng.normal(size=(4, 3)) + 1j * rng.normal(size=(4, 3))
        fields = tuple(np.fft.irfft(hats[:, i] * n, n=n) for i in range(3))
        pi_dir = perturbation.PerturbationState(
            grid=grid, rho=fields[0], phi=fields[1], h=fields[2]
        )
        rep = perturbation.quadratic_order_check(pi_dir, params, wave, exp["eps_list"])
        reports.append(rep.to_json_dict())
        all_pass = all_pass and rep.passed
    write_json(
        out / "quadratic.json",
        "cglb.quadratic.v1",
        {"directions": reports, "pass": all_pass},
    )
    return 0 if all_pass else 2


COMMANDS = {
    "simulate": cmd_simulate,
    "dispersion": cmd_dispersion,
    "stability-scan": cmd_stability_scan,
    "decay-fit": cmd_decay_fit,
    "instability": cmd_instability,
    "besov-check": cmd_besov_check,
    "quadratic-check": cmd_quadratic_check,
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="cglb",
        description="Simulation and spectral-stability toolkit for coupled "
        "complex Ginzburg-Landau / Burgers dynamics",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="INI config file")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=1)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        return _fail_json(str(exc), 1)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        return COMMANDS[args.command](cfg, out, args.seed, args.threads)
    except (ValueError, ArithmeticError) as exc:
        return _fail_json(str(exc), 1)


if __name__ == "__main__":
    sys.exit(main())
