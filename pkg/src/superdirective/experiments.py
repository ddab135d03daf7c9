"""
Reproduction scripts: the optimized five-element design, its comparison
configurations, sweep tables and the CSV files they are exported to.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .emcore import (BROADSIDE, CONSTANTS, END_FIRE, ArrayDesign, DesignError,
                     Excitation, FarFieldCut, directivity, gain, to_db)
from .impedance import active_input_impedance, impedance_matrix
from .network import Z0, azimuth_cut, realized_gain, total_efficiency
from .optimizer import DERun, SweepResult

__all__ = [
    "DEFAULT_FREQUENCY", "TABLE_II", "QUOTED_SPACINGS", "paper_design",
    "fit_frequency", "aperture_reduction", "DesignReport", "evaluate_design",
    "evaluate_paper_design", "ComparisonRow", "compare_configs",
    "read_excitation_file", "ExcitationFileError", "DesignFileError",
    "load_design", "design_to_dict", "table1_rows", "write_table1",
    "write_table3", "write_fig3", "write_history", "write_fig4",
    "write_fig5", "EXPORT_FLOOR_DB",
]

DEFAULT_FREQUENCY = 9.9e9
EXPORT_FLOOR_DB = -100.0

# optimized five-element array: position mm, amplitude, phase deg, length lambda
TABLE_II = (
    (-23.1083, 0.9821, 46.09, 0.443),
    (-13.6325, 1.0, -166.94, 0.444),
    (-0.0505, 1.0, 2.48, 0.439),
    (12.7182, 0.9794, 159.31, 0.453),
    (23.1083, 0.7805, -48.95, 0.481),
)
# consecutive spacings of the same design, in wavelengths
QUOTED_SPACINGS = (0.31, 0.45, 0.42, 0.34)

LABELS = ("config1", "config2", "ULA", "ULA_endfire",
          "theoretical_excitation", "optimized")


class DesignFileError(ValueError):
    pass


class ExcitationFileError(ValueError):
    pass


def fit_frequency(positions_mm=None, spacings=QUOTED_SPACINGS) -> float:
    """Least-squares wavelength from millimeter gaps vs. spacings in lambda;
    returns the matching frequency in Hz."""
    if positions_mm is None:
        positions_mm = [row[0] for row in TABLE_II]
    gaps = np.diff(np.asarray(positions_mm, float)) * 1e-3
    q = np.asarray(spacings, float)
    lam = float(gaps @ q / (q @ q))
    return CONSTANTS.c / lam


def paper_design(frequency: float = DEFAULT_FREQUENCY) -> ArrayDesign:
    lam = CONSTANTS.wavelength(frequency)
    x = [r[0] * 1e-3 for r in TABLE_II]
    l = [r[3] * lam for r in TABLE_II]
    i = [r[1] * np.exp(1j * math.radians(r[2])) for r in TABLE_II]
    return ArrayDesign.from_arrays(frequency, x, l, i)


def aperture_reduction(design: ArrayDesign) -> float:
    """Fractional span saving against the same element count at lambda/2."""
    span = design.positions[-1] - design.positions[0]
    return 1.0 - span / ((design.n - 1) * design.wavelength / 2)


@dataclass
class DesignReport:
    design: ArrayDesign
    cut: FarFieldCut
    realized_gain_db: float
    gain_db: float
    directivity_db: float
    radiation_efficiency: float
    mismatch_efficiency: float
    mismatch_efficiency_raw: float
    total_efficiency: float
    active_impedance: np.ndarray
    active_reflection: np.ndarray

    def summary(self) -> dict:
        return {
            "frequency_hz": self.design.frequency,
            "n_elements": self.design.n,
            "endfire_realized_gain_db": self.realized_gain_db,
            "endfire_gain_db": self.gain_db,
            "endfire_directivity_db": self.directivity_db,
            "radiation_efficiency": self.radiation_efficiency,
            "mismatch_efficiency": self.mismatch_efficiency,
            "mismatch_efficiency_raw": self.mismatch_efficiency_raw,
            "total_efficiency_pct": 100 * self.total_efficiency,
            "aperture_reduction_pct": 100 * aperture_reduction(self.design)
            if self.design.n > 1 else 0.0,
            "active_resistance_ohm": self.active_impedance.real.tolist(),
            "active_reactance_ohm": self.active_impedance.imag.tolist(),
            "active_reflection_mag": np.abs(self.active_reflection).tolist(),
            "peak_phi_deg": float(np.degrees(
                self.cut.phi[np.argmax(self.cut.realized_gain_dbi)])),
        }


def evaluate_design(design: ArrayDesign, step_deg: float = 0.5,
                    z0: float = Z0) -> DesignReport:
    zm = impedance_matrix(design)
    eff = total_efficiency(design, z0, zm)
    return DesignReport(
        design, azimuth_cut(design, step_deg, z0=z0),
        realized_gain(design, *END_FIRE, z0=z0, impedance=zm),
        gain(design, zm.re_total, *END_FIRE),
        directivity(design, zm.z.real, *END_FIRE),
        eff.radiation_efficiency, eff.mismatch_efficiency,
        eff.mismatch_efficiency_raw, eff.total_efficiency,
        active_input_impedance(zm, design.currents), eff.active_reflections)


def evaluate_paper_design(frequency: float = DEFAULT_FREQUENCY,
                          step_deg: float = 0.5) -> DesignReport:
    return evaluate_design(paper_design(frequency), step_deg)


@dataclass(frozen=True)
class ComparisonRow:
    label: str
    realized_gain: float
    total_efficiency: float
    direction: tuple[float, float]

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"unknown comparison label {self.label!r}")
        expected = BROADSIDE if self.label == "ULA" else END_FIRE
        if not np.allclose(self.direction, expected):
            raise ValueError(f"{self.label} must be evaluated at {expected}")


def read_excitation_file(path) -> list[Excitation]:
    """Parse ``amplitude phase_deg`` lines; ``#`` starts a comment."""
    out = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                if len(parts) != 2:
                    raise ValueError("expected 'amplitude phase_deg'")
                amp, ph = float(parts[0]), float(parts[1])
                out.append(Excitation(amp, math.radians(ph)))
            except ValueError as exc:
                raise ExcitationFileError(
                    f"{path}:{lineno}: {exc}: {raw.rstrip()!r}") from None
    if not out:
        raise ExcitationFileError(f"{path}: no excitations found")
    return out


def _row(label, design, direction, z0):
    zm = impedance_matrix(design)
    rg = realized_gain(design, *direction, z0=z0, impedance=zm)
    eff = total_efficiency(design, z0, zm).total_efficiency
    return ComparisonRow(label, rg, eff, direction)


def compare_configs(optimized: ArrayDesign | None = None,
                    lit_currents: Sequence[Excitation] | None = None,
                    z0: float = Z0) -> list[ComparisonRow]:
    """Evaluate the optimized design against its reference configurations.

    Rows come back in the fixed label order; the theoretical-excitation row
    is present only when ``lit_currents`` is given.
    """
    opt = paper_design() if optimized is None else optimized
    n, f, lam = opt.n, opt.frequency, opt.wavelength
    half = np.full(n, lam / 2)
    x_uniform = (np.arange(n) - (n - 1) / 2) * lam / 2
    k = opt.wavenumber
    rows = [
        _row("config1", ArrayDesign.from_arrays(
            f, opt.positions, half, opt.currents), END_FIRE, z0),
        _row("config2", ArrayDesign.from_arrays(
            f, x_uniform, half, opt.currents), END_FIRE, z0),
        _row("ULA", ArrayDesign.from_arrays(
            f, x_uniform, half, np.ones(n)), BROADSIDE, z0),
        # progressive phase that co-phases the elements toward end-fire
        _row("ULA_endfire", ArrayDesign.from_arrays(
            f, x_uniform, half, np.exp(1j * k * x_uniform)), END_FIRE, z0),
    ]
    if lit_currents is not None:
        if len(lit_currents) != n:
            raise ExcitationFileError(
                f"{len(lit_currents)} excitations for {n} elements")
        span = opt.positions[-1] - opt.positions[0]
        x = opt.positions[0] + np.arange(n) * span / (n - 1)
        cur = [e.current for e in lit_currents]
        rows.append(_row("theoretical_excitation",
                         ArrayDesign.from_arrays(f, x, half, cur),
                         END_FIRE, z0))
    rows.append(_row("optimized", opt, END_FIRE, z0))
    return rows


def load_design(path) -> ArrayDesign:
    """Read a JSON design file.

    Expected keys: ``frequency`` (Hz), ``elements`` (list of
    ``{position_mm, length_lambda}``), ``excitations`` (list of
    ``{amplitude, phase_deg}``), optional ``radius_lambda``.
    """
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DesignFileError(
            f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return design_from_dict(doc, str(path))


def _num(doc, key, where):
    if key not in doc:
        raise DesignFileError(f"{where}: missing field '{key}'")
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) \
            or not math.isfinite(v):
        raise DesignFileError(f"{where}: field '{key}' must be a finite number")
    return float(v)


def design_from_dict(doc, where="design") -> ArrayDesign:
    if not isinstance(doc, dict):
        raise DesignFileError(f"{where}: top level must be an object")
    known = {"frequency", "elements", "excitations", "radius_lambda"}
    extra = set(doc) - known
    if extra:
        raise DesignFileError(f"{where}: unknown field(s) {sorted(extra)}")
    f = _num(doc, "frequency", where)
    if f <= 0:
        raise DesignFileError(f"{where}: 'frequency' must be positive")
    elements, excitations = doc.get("elements"), doc.get("excitations")
    if not isinstance(elements, list) or not elements:
        raise DesignFileError(f"{where}: 'elements' must be a non-empty list")
    if not isinstance(excitations, list) or len(excitations) != len(elements):
        raise DesignFileError(
            f"{where}: 'excitations' must list one entry per element")
    lam = CONSTANTS.wavelength(f)
    rho = lam * _num(doc, "radius_lambda", where) \
        if "radius_lambda" in doc else lam / 200
    x, l, cur = [], [], []
    for n, (el, ex) in enumerate(zip(elements, excitations)):
        if not isinstance(el, dict) or not isinstance(ex, dict):
            raise DesignFileError(f"{where}: entry {n} must be an object")
        x.append(_num(el, "position_mm", f"{where}: elements[{n}]") * 1e-3)
        l.append(_num(el, "length_lambda", f"{where}: elements[{n}]") * lam)
        amp = _num(ex, "amplitude", f"{where}: excitations[{n}]")
        ph = _num(ex, "phase_deg", f"{where}: excitations[{n}]")
        if amp < 0:
            raise DesignFileError(
                f"{where}: excitations[{n}]: 'amplitude' must be >= 0")
        cur.append(amp * np.exp(1j * math.radians(ph)))
    try:
        return ArrayDesign.from_arrays(f, x, l, cur, rho)
    except DesignError as exc:
        raise DesignFileError(f"{where}: {exc}") from None


def design_to_dict(design: ArrayDesign) -> dict:
    lam = design.wavelength
    return {
        "frequency": design.frequency,
        "radius_lambda": design.elements[0].radius / lam,
        "elements": [{"position_mm": e.position_x * 1e3,
                      "length_lambda": e.length / lam}
                     for e in design.elements],
        "excitations": [{"amplitude": e.amplitude,
                         "phase_deg": math.degrees(e.phase)}
                        for e in design.excitations],
    }


def table1_rows(sweep: SweepResult, n_values: Iterable[int] = range(2, 11)):
    """Rows of per-element active input resistance, columns per N; None
    where the array has fewer elements."""
    n_values = list(n_values)
    res = {n: sweep.runs[n].active_resistance for n in n_values
           if n in sweep.runs}
    rows = []
    for idx in range(max(n_values)):
        rows.append([idx + 1] + [
            float(res[n][idx]) if n in res and idx < len(res[n]) else None
            for n in n_values])
    return n_values, rows


def _writer(path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fh = open(path, "w", newline="")
    return fh, csv.writer(fh, lineterminator="\n")


def _fmt(v, digits=6):
    return "" if v is None else f"{v:.{digits}f}"


def write_table1(path, sweep: SweepResult, n_values=range(2, 11)):
    cols, rows = table1_rows(sweep, n_values)
    fh, w = _writer(path)
    with fh:
        w.writerow(["element_index"] + [f"N{n}" for n in cols])
        for r in rows:
            w.writerow([r[0]] + [_fmt(v, 4) for v in r[1:]])


def write_table3(path, rows: Sequence[ComparisonRow]):
    fh, w = _writer(path)
    with fh:
        w.writerow(["label", "realized_gain_db", "total_eff_pct",
                    "theta_deg", "phi_deg"])
        for r in rows:
            w.writerow([r.label, _fmt(max(r.realized_gain, EXPORT_FLOOR_DB), 4),
                        _fmt(100 * r.total_efficiency, 4),
                        _fmt(math.degrees(r.direction[0]), 1),
                        _fmt(math.degrees(r.direction[1]), 1)])


def write_fig3(path, run: DERun):
    fh, w = _writer(path)
    with fh:
        w.writerow(["iteration", "best_cost"])
        for it, c in enumerate(run.history):
            w.writerow([it, repr(float(c))])


def write_history(path, run: DERun, rg_history):
    fh, w = _writer(path)
    with fh:
        w.writerow(["iteration", "best_cost", "best_oRG_dB"])
        for it, (c, g) in enumerate(zip(run.history, rg_history)):
            w.writerow([it, repr(float(c)), _fmt(float(g), 6)])


def write_fig4(path, sweep: SweepResult):
    fh, w = _writer(path)
    with fh:
        w.writerow(["N", "dRG_db", "oRG_db"])
        for n, r in sorted(sweep.runs.items()):
            w.writerow([n, _fmt(r.target_db, 4), _fmt(r.realized_gain_db, 4)])


def write_fig5(path, cut: FarFieldCut):
    fh, w = _writer(path)
    with fh:
        w.writerow(["phi_deg", "rg_db"])
        rg = to_db(10 ** (cut.realized_gain_dbi / 10), floor=EXPORT_FLOOR_DB)
        for p, g in zip(np.degrees(cut.phi), rg):
            w.writerow([_fmt(p, 2), _fmt(float(g), 4)])
