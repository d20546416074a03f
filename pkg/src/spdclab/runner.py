"""Scenario execution: products, CSV emission and comparisons.

Products are CSV files with a provenance header (scenario keys plus the run
timestamp as comments) followed by a deterministic body, so re-running the
same scenario and seed reproduces every body byte for byte.  Column names
carry units; dimensionless columns are plain ``value``/``stderr``.
"""
from __future__ import annotations

import os
import time
from dataclasses import dataclass

import numpy as np

from . import correlate, events, evtfile, model, smearing
from .curves import CorrelationCurve, CorrelationSurface, EstimatorCurve
from .params import GridError
from .scenario import Scenario

__all__ = [
    "run_analytic",
    "run_smear",
    "run_simulate",
    "run_count",
    "run_compare",
    "write_curve_csv",
    "read_curve_csv",
]

_UNIT_SUFFIX = {
    "dimensionless": "",
    "per_s": "_per_s",
    "per_s3": "_per_s3",
}


def _atomic_write(path, text: str) -> None:
    tmp = os.fspath(path) + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, os.fspath(path))


def _header(scenario: Scenario | None) -> list[str]:
    lines = [] if scenario is None else list(scenario.header_lines())
    lines.append(f"# generated_at = {time.strftime('%Y-%m-%dT%H:%M:%S%z')}")
    return lines


def write_curve_csv(
    path, delays, values, stderr=None, unit: str = "dimensionless",
    scenario: Scenario | None = None,
) -> None:
    suffix = _UNIT_SUFFIX.get(unit, f"_{unit}")
    lines = _header(scenario)
    if stderr is None:
        lines.append(f"delay_s,value{suffix}")
        for d, v in zip(delays, values):
            lines.append(f"{float(d)!r},{float(v)!r}")
    else:
        lines.append(f"delay_s,value{suffix},stderr{suffix}")
        for d, v, e in zip(delays, values, stderr):
            lines.append(f"{float(d)!r},{float(v)!r},{float(e)!r}")
    _atomic_write(path, "\n".join(lines) + "\n")


def write_surface_csv(
    path, surface: CorrelationSurface, scenario: Scenario | None = None
) -> None:
    suffix = _UNIT_SUFFIX.get(surface.unit, f"_{surface.unit}")
    lines = _header(scenario)
    lines.append(f"t1_s,t2_s,value{suffix}")
    for i, a in enumerate(surface.t1):
        for j, b in enumerate(surface.t2):
            lines.append(
                f"{float(a)!r},{float(b)!r},{float(surface.values[i, j])!r}"
            )
    _atomic_write(path, "\n".join(lines) + "\n")


def read_curve_csv(path):
    """Read delays, values and (optionally) stderr back from a product."""
    delays, values, stderr = [], [], []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#") or line.startswith("delay_s"):
                continue
            parts = line.strip().split(",")
            if len(parts) < 2:
                continue
            delays.append(float(parts[0]))
            values.append(float(parts[1]))
            stderr.append(float(parts[2]) if len(parts) > 2 else np.nan)
    return np.array(delays), np.array(values), np.array(stderr)


def _curve_product(path, curve: CorrelationCurve, scenario: Scenario) -> None:
    write_curve_csv(path, curve.delays, curve.values, unit=curve.unit,
                    scenario=scenario)


def run_analytic(scenario: Scenario, outdir) -> dict[str, str]:
    """Emit the closed-form model curves on the scenario's delay grid."""
    os.makedirs(outdir, exist_ok=True)
    src = scenario.source
    delays = scenario.window.delays()
    out = {}

    def emit(name, values, unit="dimensionless"):
        path = os.path.join(outdir, name + ".csv")
        write_curve_csv(path, delays, values, unit=unit, scenario=scenario)
        out[name] = path

    emit("auto_correlation", model.auto_correlation(src, delays), "per_s")
    emit("cross_correlation", model.cross_correlation(src, delays), "per_s")
    emit("g2_si", model.g2_si(src, delays))
    emit("g2_ss", model.g2_ss_unconditional(src, delays))
    emit("p_ssi_diag", model.p_ssi_diag(src, delays), "per_s3")
    emit("g2_c_diag", model.g2_c(src, 0.0, delays, 0.0))
    return out


def _scenario_kernel(scenario: Scenario) -> smearing.ResponseKernel:
    return smearing.build_kernel(
        scenario.window.coincidence_halfwidth,
        scenario.chain.jitter_width,
        scenario.window.bin_width,
    )


def run_smear(scenario: Scenario, outdir, with_surface: bool = False) -> dict[str, str]:
    """Emit the window-averaged curves and plateau predictions."""
    os.makedirs(outdir, exist_ok=True)
    src = scenario.source
    window = scenario.window
    kernel = _scenario_kernel(scenario)
    out = {}

    kpath = os.path.join(outdir, "kernel.csv")
    write_curve_csv(kpath, kernel.delays(), kernel.samples, unit="per_s",
                    scenario=scenario)
    out["kernel"] = kpath

    half_span = window.span + kernel.support_halfwidth + window.bin_width
    curve = smearing.smear_curve(
        smearing.sample_g2_si(src, window.bin_width, half_span), kernel
    )
    keep = np.abs(curve.delays) <= window.span + window.bin_width / 2
    path = os.path.join(outdir, "g2_si_smeared.csv")
    write_curve_csv(path, curve.delays[keep], curve.values[keep],
                    unit=curve.unit, scenario=scenario)
    out["g2_si_smeared"] = path

    gbar = smearing.gbar2c_analytic(src, kernel, window.delays())
    _curve_product(os.path.join(outdir, "gbar2_c_analytic.csv"), gbar, scenario)
    out["gbar2_c_analytic"] = os.path.join(outdir, "gbar2_c_analytic.csv")

    pred = smearing.predict_plateaus(src, kernel)
    lines = _header(scenario)
    lines.append("quantity,value")
    lines.append(f"X,{pred.X!r}")
    lines.append(f"g2si_plateau,{pred.g2si_plateau!r}")
    lines.append(f"nssi_short_per_s3,{pred.nssi_short!r}")
    lines.append(f"nssi_long_per_s3,{pred.nssi_long!r}")
    lines.append(f"gbar2c_short,{pred.gbar2c_short!r}")
    ppath = os.path.join(outdir, "plateaus.csv")
    _atomic_write(ppath, "\n".join(lines) + "\n")
    out["plateaus"] = ppath

    if with_surface:
        half = window.span + kernel.support_halfwidth + window.bin_width
        surface = smearing.smear_surface(
            smearing.sample_p_ssi(src, window.bin_width, half), kernel
        )
        spath = os.path.join(outdir, "p_ssi_smeared.csv")
        write_surface_csv(spath, surface, scenario)
        out["p_ssi_smeared"] = spath
    return out


def run_simulate(scenario: Scenario, outdir) -> dict[str, str]:
    """Generate event streams and persist them as an .evt file."""
    os.makedirs(outdir, exist_ok=True)
    gen = (
        events.gen_thermal_cells
        if scenario.model == "thermal"
        else events.gen_poisson_pairs
    )
    pairs = gen(scenario.source, scenario.duration, scenario.seed)
    streams = events.apply_detector_chain(pairs, scenario.chain, scenario.seed)
    path = os.path.join(outdir, "events.evt")
    evtfile.write_events(streams, path)
    return {"events": path}


def run_count(scenario: Scenario, evt_path, outdir) -> dict[str, str]:
    """Count coincidences in an .evt file and emit the estimator curves."""
    os.makedirs(outdir, exist_ok=True)
    streams = {s.channel: s for s in evtfile.read_events(evt_path)}
    idler, s1, s2 = streams["idler"], streams["signal1"], streams["signal2"]
    window = scenario.window
    delays = window.delays()
    tauc = window.coincidence_halfwidth
    out = {}

    rates = {name: correlate.singles_rate(streams[name]) for name in streams}
    lines = _header(scenario)
    lines.append("channel,rate_per_s,stderr_per_s")
    for name in ("idler", "signal1", "signal2"):
        lines.append(f"{name},{rates[name].value!r},{rates[name].stderr!r}")
    spath = os.path.join(outdir, "singles.csv")
    _atomic_write(spath, "\n".join(lines) + "\n")
    out["singles"] = spath

    pairs_s1 = correlate.pair_histogram(s1, idler, delays, tauc)
    pairs_s2 = correlate.pair_histogram(s2, idler, delays, tauc)
    triples = correlate.triple_histogram(idler, s1, s2, delays, tauc)

    for name, hist in (("pairs_s1_idler", pairs_s1), ("pairs_s2_idler", pairs_s2),
                       ("triples", triples)):
        path = os.path.join(outdir, name + ".csv")
        lines = _header(scenario)
        lines.append("delay_s,counts")
        for d, c in zip(hist.delays, hist.counts):
            lines.append(f"{d!r},{int(c)}")
        _atomic_write(path, "\n".join(lines) + "\n")
        out[name] = path

    g2bar = correlate.estimate_g2bar_si(pairs_s1, rates["signal1"], rates["idler"])
    path = os.path.join(outdir, "g2bar_si.csv")
    write_curve_csv(path, g2bar.delays, g2bar.values, g2bar.stderr,
                    scenario=scenario)
    out["g2bar_si"] = path

    zero = correlate.pair_histogram(s1, idler, np.array([0.0]), tauc)
    pairs0 = float(zero.rates[0])
    gbar2c = correlate.estimate_gbar2_c(triples, pairs0, pairs_s2, rates["idler"])
    path = os.path.join(outdir, "gbar2_c.csv")
    write_curve_csv(path, gbar2c.delays, gbar2c.values, gbar2c.stderr,
                    scenario=scenario)
    out["gbar2_c"] = path
    return out


@dataclass(frozen=True)
class CompareResult:
    delays: np.ndarray
    z: np.ndarray
    max_abs_z: float


def run_compare(path_a, path_b, out_path=None) -> CompareResult:
    """Per-bin z-scores between two estimator CSVs sharing one grid."""
    da, va, ea = read_curve_csv(path_a)
    db, vb, eb = read_curve_csv(path_b)
    if da.shape != db.shape or np.any(np.abs(da - db) > 1e-12 + 1e-9 * np.abs(da)):
        raise GridError("compare inputs must share one delay grid")
    denom = np.sqrt(ea**2 + eb**2)
    z = np.where(denom > 0, (va - vb) / np.where(denom > 0, denom, 1.0), np.nan)
    finite = z[np.isfinite(z)]
    max_abs = float(np.max(np.abs(finite))) if finite.size else np.nan
    if out_path is not None:
        lines = [f"# compare = {os.fspath(path_a)} vs {os.fspath(path_b)}",
                 f"# max_abs_z = {max_abs!r}", "delay_s,z"]
        for d, value in zip(da, z):
            lines.append(f"{float(d)!r},{float(value)!r}")
        _atomic_write(out_path, "\n".join(lines) + "\n")
    return CompareResult(da, z, max_abs)
