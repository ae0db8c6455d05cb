"""Report bundles: parameter tables, criterion tables, curves and SVG plots.

Every artifact is deterministic for fixed inputs: tables use fixed numeric
formats, plots carry no timestamps or generated ids, and file ordering is
fixed.  A bundle directory contains ``params.csv``, ``criteria.csv``,
``contributions.csv``, ``curves_<mode>.csv`` and ``plot_<mode>.svg`` per
mode, ``summary.md`` and one ``model_<label>.txt`` per reported model.
"""

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import Dataset
from .energy import PARAMETER_LABELS, model_expression, parameter_vector, save_model
from .exceptions import FeasibilityError
from .fit import FitResult, r_squared
from .kinematics import LoadingMode
from .select import DiscoveryResult, SweepRow, contribution_table
from .stress import predict_curve

__all__ = ["ReportColumn", "write_bundle", "write_sweep_bundle"]

_NUM = "%.10g"

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

_MODE_TITLES = {
    LoadingMode.TENSION: "uniaxial tension",
    LoadingMode.COMPRESSION: "uniaxial compression",
    LoadingMode.SHEAR: "simple shear",
}

_CONTROL_LABELS = {
    LoadingMode.TENSION: "stretch",
    LoadingMode.COMPRESSION: "stretch",
    LoadingMode.SHEAR: "amount of shear",
}


@dataclass
class ReportColumn:
    """One fitted model to include in a bundle."""

    label: str
    result: FitResult
    discovery: DiscoveryResult | None = None
    constants: dict[str, float] | None = None
    notes: tuple[str, ...] = ()
    test_r2: dict[LoadingMode, tuple[float, float] | None] = field(default_factory=dict)


def _fmt(value: float | None) -> str:
    if value is None:
        return ""
    if value == -math.inf:
        return "-inf"
    if value == math.inf:
        return "inf"
    return _NUM % value


def _subset_key(indices) -> str:
    return "+".join(str(i) for i in indices) if indices else "empty"


def holdout_r2(column: ReportColumn, dataset: Dataset, train_modes) -> None:
    """Fill ``column.test_r2`` for every held-out mode present in the file."""
    for series in dataset.series:
        if series.mode in train_modes:
            continue
        try:
            pred = predict_curve(column.result.model, series.mode, series.controls)
            raw = r_squared(pred, series.stresses)
            column.test_r2[series.mode] = (raw, max(0.0, raw))
        except FeasibilityError:
            column.test_r2[series.mode] = None


def _params_rows(columns):
    rows = [["param"] + [c.label for c in columns]]
    vectors = [parameter_vector(c.result.model) for c in columns]
    presence = []
    for c in columns:
        mask = np.zeros(20, dtype=bool)
        for kind, params in c.result.model.terms:
            mask[kind.index - 1] = True
            if kind.inner_slot is not None:
                mask[kind.inner_slot - 1] = True
        presence.append(mask)
    for slot in range(20):
        row = [PARAMETER_LABELS[slot]]
        for vector, mask in zip(vectors, presence):
            row.append(_fmt(float(vector[slot])) if mask[slot] else "")
        rows.append(row)
    for mode in (LoadingMode.TENSION, LoadingMode.COMPRESSION, LoadingMode.SHEAR):
        floored_row = [f"R2_{mode.value}"]
        raw_row = [f"R2_{mode.value}_raw"]
        for c in columns:
            if mode in c.result.mode_r2:
                floored_row.append(_fmt(c.result.mode_r2_floored[mode]))
                raw_row.append(_fmt(c.result.mode_r2[mode]))
            elif mode in c.test_r2:
                pair = c.test_r2[mode]
                floored_row.append(_fmt(pair[1]) if pair else "")
                raw_row.append(_fmt(pair[0]) if pair else "")
            else:
                floored_row.append("")
                raw_row.append("")
        rows.append(floored_row)
        rows.append(raw_row)
    return rows


def _criteria_rows(columns):
    rows = [["label", "size", "subset", "m", "rss_kpa2",
             "total_mape_percent", "score"]]
    for c in columns:
        d = c.discovery
        if d is not None and d.method == "mr" and d.per_size:
            for size in sorted(d.per_size):
                record = d.per_size[size]
                rows.append([
                    c.label, str(size), _subset_key(record.subset),
                    str(record.fit.n_parameters), _fmt(record.fit.rss),
                    _fmt(record.fit.total_mape), _fmt(record.score)])
            continue
        if d is not None and d.method == "nn" and d.full_fit is not None:
            rows.append([
                f"{c.label}_full", str(len(d.full_fit.model)),
                _subset_key(d.full_fit.model.indices),
                str(d.full_fit.n_parameters), _fmt(d.full_fit.rss),
                _fmt(d.full_fit.total_mape), ""])
            rows.append([
                f"{c.label}_pruned", str(len(c.result.model)),
                _subset_key(c.result.model.indices),
                str(c.result.n_parameters), _fmt(c.result.rss),
                _fmt(c.result.total_mape), ""])
            continue
        rows.append([
            c.label, str(len(c.result.model)),
            _subset_key(c.result.model.indices), str(c.result.n_parameters),
            _fmt(c.result.rss), _fmt(c.result.total_mape), ""])
    return rows


def _contribution_rows(columns, train_dataset):
    header = (["method", "mode", "control", "total_energy_kpa"]
              + [f"frac_{i}" for i in range(1, 13)])
    rows = [header]
    for c in columns:
        table = (c.discovery.contributions if c.discovery is not None
                 else contribution_table(c.result.model, train_dataset))
        for series in table:
            for position in range(len(series.controls)):
                rows.append(
                    [c.label, series.mode.value,
                     _fmt(float(series.controls[position])),
                     _fmt(float(series.total_energy[position]))]
                    + [_fmt(float(series.fractions[position, i]))
                       for i in range(12)])
    return rows


def _write_csv(path: Path, rows) -> None:
    text = "\n".join(",".join(row) for row in rows) + "\n"
    path.write_text(text, encoding="utf-8", newline="\n")


def _curve_controls(series) -> np.ndarray:
    return np.linspace(float(series.controls[0]), float(series.controls[-1]), 100)


def _curves_for_mode(columns, series):
    grid = _curve_controls(series)
    out = []
    for c in columns:
        try:
            out.append((c.label, predict_curve(c.result.model, series.mode, grid)))
        except FeasibilityError:
            out.append((c.label, None))
    return grid, out


# ---------------------------------------------------------------------------
# Minimal deterministic SVG plotting.

_WIDTH, _HEIGHT = 720, 540
_ML, _MR, _MT, _MB = 78, 24, 24, 58


def _nice_ticks(lo: float, hi: float, target: int = 5):
    span = hi - lo
    if span <= 0.0:
        return [lo]
    raw = span / target
    magnitude = 10.0 ** math.floor(math.log10(raw))
    step = magnitude
    for mult in (1.0, 2.0, 5.0, 10.0):
        step = mult * magnitude
        if span / step <= target + 0.5:
            break
    first = math.ceil(lo / step - 1e-9) * step
    ticks = []
    value = first
    while value <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(value) < 1e-12 * step else value)
        value += step
    return ticks


def _svg_plot(series, curves, grid) -> str:
    xs = [float(v) for v in series.controls] + [float(v) for v in grid]
    ys = [float(v) for v in series.stresses]
    for _, values in curves:
        if values is not None:
            ys.extend(float(v) for v in values)
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi <= x_lo:
        x_lo, x_hi = x_lo - 0.5, x_lo + 0.5
    if y_hi <= y_lo:
        y_lo, y_hi = y_lo - 0.5, y_lo + 0.5
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    def sx(value):
        return _ML + (value - x_lo) / (x_hi - x_lo) * (_WIDTH - _ML - _MR)

    def sy(value):
        return _HEIGHT - _MB - (value - y_lo) / (y_hi - y_lo) * (_HEIGHT - _MT - _MB)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
        f'height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect x="0" y="0" width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
    ]
    axis_color = "#333333"
    y0 = sy(y_lo)
    parts.append(f'<line x1="{_ML}" y1="{sy(y_lo):.2f}" x2="{_WIDTH - _MR}" '
                 f'y2="{sy(y_lo):.2f}" stroke="{axis_color}" stroke-width="1"/>')
    parts.append(f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" '
                 f'y2="{sy(y_lo):.2f}" stroke="{axis_color}" stroke-width="1"/>')
    for tick in _nice_ticks(x_lo, x_hi):
        px = sx(tick)
        parts.append(f'<line x1="{px:.2f}" y1="{y0:.2f}" x2="{px:.2f}" '
                     f'y2="{y0 + 5:.2f}" stroke="{axis_color}" stroke-width="1"/>')
        parts.append(f'<text x="{px:.2f}" y="{y0 + 20:.2f}" font-size="12" '
                     f'text-anchor="middle" fill="{axis_color}">{tick:.6g}</text>')
    for tick in _nice_ticks(y_lo, y_hi):
        py = sy(tick)
        parts.append(f'<line x1="{_ML - 5}" y1="{py:.2f}" x2="{_ML}" '
                     f'y2="{py:.2f}" stroke="{axis_color}" stroke-width="1"/>')
        parts.append(f'<text x="{_ML - 9}" y="{py + 4:.2f}" font-size="12" '
                     f'text-anchor="end" fill="{axis_color}">{tick:.6g}</text>')
    parts.append(
        f'<text x="{(_ML + _WIDTH - _MR) / 2:.2f}" y="{_HEIGHT - 14}" '
        f'font-size="14" text-anchor="middle" fill="{axis_color}">'
        f'{_CONTROL_LABELS[series.mode]}</text>')
    parts.append(
        f'<text x="18" y="{(_MT + _HEIGHT - _MB) / 2:.2f}" font-size="14" '
        f'text-anchor="middle" fill="{axis_color}" '
        f'transform="rotate(-90 18 {(_MT + _HEIGHT - _MB) / 2:.2f})">'
        'nominal stress [kPa]</text>')
    for position, (label, values) in enumerate(curves):
        if values is None:
            continue
        color = _PALETTE[position % len(_PALETTE)]
        points = " ".join(f"{sx(float(g)):.2f},{sy(float(v)):.2f}"
                          for g, v in zip(grid, values))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" '
                     f'points="{points}"/>')
    for control, stress in zip(series.controls, series.stresses):
        parts.append(f'<circle cx="{sx(float(control)):.2f}" '
                     f'cy="{sy(float(stress)):.2f}" r="3.5" fill="none" '
                     'stroke="black" stroke-width="1.4"/>')
    legend_y = _MT + 16
    parts.append(f'<circle cx="{_ML + 14}" cy="{legend_y - 4}" r="3.5" '
                 'fill="none" stroke="black" stroke-width="1.4"/>')
    parts.append(f'<text x="{_ML + 26}" y="{legend_y}" font-size="12" '
                 f'fill="{axis_color}">data ({_MODE_TITLES[series.mode]})</text>')
    for position, (label, values) in enumerate(curves):
        legend_y += 18
        color = _PALETTE[position % len(_PALETTE)]
        suffix = "" if values is not None else " (infeasible)"
        parts.append(f'<line x1="{_ML + 6}" y1="{legend_y - 4}" '
                     f'x2="{_ML + 22}" y2="{legend_y - 4}" stroke="{color}" '
                     'stroke-width="2"/>')
        parts.append(f'<text x="{_ML + 26}" y="{legend_y}" font-size="12" '
                     f'fill="{axis_color}">{label}{suffix}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# ---------------------------------------------------------------------------
# Bundle assembly.

def _summary_lines(dataset, train_modes, columns, config_echo):
    lines = ["# Discovery report", ""]
    lines.append(f"- dataset: `{dataset.provenance}` "
                 f"({dataset.n_points} points, modes "
                 f"{'+'.join(m.value for m in dataset.modes)})")
    lines.append(f"- training modes: {'+'.join(m.value for m in train_modes)}")
    for key in sorted(config_echo):
        lines.append(f"- {key}: {config_echo[key]}")
    lines.append("")
    for c in columns:
        lines.append(f"## model `{c.label}`")
        lines.append("")
        lines.append(f"- Psi = {model_expression(c.result.model)}")
        lines.append(f"- terms: {_subset_key(c.result.model.indices)} "
                     f"(m = {c.result.n_parameters})")
        lines.append(f"- total MAPE on training data: "
                     f"{_fmt(c.result.total_mape)} percent")
        lines.append(f"- pooled RSS: {_fmt(c.result.rss)} kPa^2; "
                     f"pooled R2: {_fmt(c.result.r2)}")
        for mode, value in c.result.mode_r2.items():
            lines.append(f"- train R2 ({mode.value}): {_fmt(value)} "
                         f"(floored {_fmt(c.result.mode_r2_floored[mode])})")
        for mode, pair in c.test_r2.items():
            if pair is None:
                lines.append(f"- test R2 ({mode.value}): undefined "
                             "(model infeasible on held-out range)")
            else:
                lines.append(f"- test R2 ({mode.value}): {_fmt(pair[0])} "
                             f"(floored {_fmt(pair[1])})")
        if c.constants:
            constants = ", ".join(f"{name} = {_fmt(value)}"
                                  for name, value in sorted(c.constants.items()))
            lines.append(f"- material constants: {constants}")
        if not c.result.converged:
            lines.append("- warning: fit did not meet its convergence tolerances")
        for note in c.notes:
            lines.append(f"- note: {note}")
        if c.discovery is not None:
            for note in c.discovery.warnings:
                lines.append(f"- note: {note}")
        lines.append("")
    lines.append("## files")
    lines.append("")
    return lines


def write_bundle(out_dir, dataset: Dataset, train_dataset: Dataset,
                 train_modes, columns, config_echo) -> list[Path]:
    """Write a full report bundle; returns the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for column in columns:
        holdout_r2(column, dataset, train_modes)
    written = []

    path = out / "params.csv"
    _write_csv(path, _params_rows(columns))
    written.append(path)
    path = out / "criteria.csv"
    _write_csv(path, _criteria_rows(columns))
    written.append(path)
    path = out / "contributions.csv"
    _write_csv(path, _contribution_rows(columns, train_dataset))
    written.append(path)

    for series in dataset.series:
        grid, curves = _curves_for_mode(columns, series)
        rows = [["control"] + [f"{label}_kpa" for label, _ in curves]]
        for position in range(len(grid)):
            row = [_fmt(float(grid[position]))]
            for _, values in curves:
                row.append(_fmt(float(values[position])) if values is not None else "")
            rows.append(row)
        path = out / f"curves_{series.mode.value}.csv"
        _write_csv(path, rows)
        written.append(path)
        path = out / f"plot_{series.mode.value}.svg"
        path.write_text(_svg_plot(series, curves, grid), encoding="utf-8",
                        newline="\n")
        written.append(path)

    for column in columns:
        path = out / f"model_{column.label}.txt"
        save_model(path, column.result.model)
        written.append(path)

    lines = _summary_lines(dataset, train_modes, columns, config_echo)
    lines += [f"- `{p.name}`" for p in written] + ["- `summary.md`", ""]
    path = out / "summary.md"
    path.write_text("\n".join(lines), encoding="utf-8", newline="\n")
    written.append(path)
    return written


def write_sweep_bundle(out_dir, dataset: Dataset, rows: tuple[SweepRow, ...],
                       config_echo) -> list[Path]:
    """Write a regularization-sweep table plus its summary."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    table = [["alpha1", "alpha2", "n_terms", "subset",
              "total_mape_percent", "r2_ten", "r2_com", "r2_shr", "error"]]
    for row in rows:
        r2 = {m: "" for m in LoadingMode}
        if row.mode_r2:
            for mode, value in row.mode_r2.items():
                r2[mode] = _fmt(value)
        table.append([
            _fmt(row.alpha1), _fmt(row.alpha2),
            "" if row.n_terms is None else str(row.n_terms),
            _subset_key(row.model.indices) if row.model is not None else "",
            _fmt(row.total_mape),
            r2[LoadingMode.TENSION], r2[LoadingMode.COMPRESSION],
            r2[LoadingMode.SHEAR],
            row.error or ""])
    path = out / "sweep.csv"
    _write_csv(path, table)
    written.append(path)

    lines = ["# Regularization sweep", ""]
    lines.append(f"- dataset: `{dataset.provenance}` ({dataset.n_points} points)")
    for key in sorted(config_echo):
        lines.append(f"- {key}: {config_echo[key]}")
    lines.append("")
    lines.append("| alpha1 | alpha2 | surviving terms | total MAPE |")
    lines.append("|---|---|---|---|")
    for row in rows:
        lines.append(
            f"| {_fmt(row.alpha1)} | {_fmt(row.alpha2)} | "
            f"{'-' if row.n_terms is None else row.n_terms} | "
            f"{'-' if row.total_mape is None else _fmt(row.total_mape)} |")
    lines += ["", "- `sweep.csv`", "- `summary.md`", ""]
    path = out / "summary.md"
    path.write_text("\n".join(lines), encoding="utf-8", newline="\n")
    written.append(path)
    return written
