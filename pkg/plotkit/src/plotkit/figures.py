"""Render figures from riet CSV outputs.

A figure spec is a JSON object:

    {
      "kind": "population_overlay | rate_sweep | rhp_summary | fidelity | trotter_error",
      "inputs": [{"path": "out/trajectory.csv", "label": "tau = 0.1",
                  "reference": false}, ...],
      "output": "figure.png",
      "title": "optional"
    }

Inputs flagged ``"reference": true`` are drawn dashed (the Lindblad
reference convention). Input files are never modified; rendering the same
spec twice produces the same image.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["FigureSpec", "FigureInput", "FigureError", "load_spec", "render"]

KINDS = ("population_overlay", "rate_sweep", "rhp_summary", "fidelity", "trotter_error")

RHP_DISPLAY_FLOOR = 1e-4  # measures below the concurrence round-off floor plot as 0


class FigureError(ValueError):
    """Bad figure spec or input file."""


@dataclass(frozen=True)
class FigureInput:
    path: str
    label: str
    reference: bool = False


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: tuple[FigureInput, ...]
    output: str
    title: str | None = None


def load_spec(path) -> FigureSpec:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FigureError(f"{path}: parse error at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise FigureError(f"{path}: figure spec must be a JSON object")
    kind = raw.get("kind")
    if kind not in KINDS:
        raise FigureError(f"{path}: kind must be one of {KINDS}, got {kind!r}")
    inputs = raw.get("inputs")
    if not inputs:
        raise FigureError(f"{path}: spec needs at least one input")
    parsed = []
    for item in inputs:
        if "path" not in item:
            raise FigureError(f"{path}: every input needs a 'path'")
        parsed.append(FigureInput(path=item["path"],
                                  label=item.get("label", Path(item["path"]).stem),
                                  reference=bool(item.get("reference", False))))
    output = raw.get("output")
    if not output:
        raise FigureError(f"{path}: spec needs an 'output' image path")
    return FigureSpec(kind=kind, inputs=tuple(parsed), output=output,
                      title=raw.get("title"))


def read_columns(path) -> dict[str, np.ndarray]:
    """Read a riet CSV into named float columns (converged parses as 0/1)."""
    p = Path(path)
    if not p.exists():
        raise FigureError(f"{path}: no such file")
    with open(p, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FigureError(f"{path}: file is empty") from None
        rows = [r for r in reader if r]
    if not rows:
        raise FigureError(f"{path}: no data rows")
    cols: dict[str, list[float]] = {name: [] for name in header}
    for r in rows:
        if len(r) != len(header):
            raise FigureError(f"{path}: ragged row with {len(r)} cells, "
                              f"expected {len(header)}")
        for name, cell in zip(header, r):
            if cell == "True":
                val = 1.0
            elif cell == "False":
                val = 0.0
            elif cell == "":
                val = np.nan
            else:
                try:
                    val = float(cell)
                except ValueError:
                    raise FigureError(f"{path}: cannot parse {cell!r} in column "
                                      f"'{name}'") from None
            cols[name].append(val)
    return {name: np.asarray(v) for name, v in cols.items()}


def need(cols: dict, path, *names) -> list[np.ndarray]:
    out = []
    for name in names:
        if name not in cols:
            raise FigureError(f"{path}: missing column '{name}'")
        out.append(cols[name])
    return out


def _line_style(inp: FigureInput) -> dict:
    return {"linestyle": "--", "color": "black"} if inp.reference else {}


def _plot_traces(ax, spec: FigureSpec, column: str) -> None:
    for inp in spec.inputs:
        cols = read_columns(inp.path)
        t, y = need(cols, inp.path, "t", column)
        ax.plot(t, y, label=inp.label, **_line_style(inp))
    ax.set_xlabel("t (periods)")
    ax.legend(frameon=False)


def render(spec: FigureSpec) -> str:
    """Draw the figure described by `spec`; returns the output path."""
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    try:
        if spec.kind == "population_overlay":
            _plot_traces(ax, spec, "P_D")
            ax.set_ylabel("donor population")
            ax.set_ylim(-0.02, 1.02)
        elif spec.kind == "fidelity":
            _plot_traces(ax, spec, "fidelity")
            ax.set_ylabel("fidelity")
            ax.axhline(0.99, color="gray", linewidth=0.6)
        elif spec.kind == "rate_sweep":
            for inp in spec.inputs:
                cols = read_columns(inp.path)
                x, k = need(cols, inp.path, "delta_e", "k")
                ax.plot(x, k, label=inp.label, marker=".", markersize=3,
                        **_line_style(inp))
            ax.set_xlabel("energy gap (hw)")
            ax.set_ylabel("transfer rate k (1/period)")
            ax.legend(frameon=False)
        elif spec.kind == "rhp_summary":
            labels, values = [], []
            for inp in spec.inputs:
                cols = read_columns(inp.path)
                (conc,) = need(cols, inp.path, "concurrence")
                measure = float(np.abs(np.diff(conc)).sum() - (conc[0] - conc[-1]))
                labels.append(inp.label)
                values.append(0.0 if measure < RHP_DISPLAY_FLOOR else measure)
            ax.bar(range(len(values)), values)
            ax.set_xticks(range(len(labels)), labels, rotation=20, ha="right")
            ax.set_ylabel("backflow measure")
        elif spec.kind == "trotter_error":
            for inp in spec.inputs:
                cols = read_columns(inp.path)
                n, k = need(cols, inp.path, "trotter_n", "k")
                ref = k[n == 0]
                if ref.size != 1:
                    raise FigureError(f"{inp.path}: trotter_error needs exactly one "
                                      f"trotter_n = 0 reference row")
                mask = n > 0
                err = 100.0 * np.abs(k[mask] - ref[0]) / abs(ref[0])
                order = np.argsort(n[mask])
                ax.plot(n[mask][order], err[order], marker="o", label=inp.label)
            ax.set_xscale("log", base=2)
            ax.set_xlabel("product-formula steps per interaction")
            ax.set_ylabel("rate error (%)")
            ax.axhline(4.0, color="gray", linewidth=0.6)
            ax.legend(frameon=False)
        else:  # pragma: no cover - load_spec guards
            raise FigureError(f"unknown kind {spec.kind!r}")
        if spec.title:
            ax.set_title(spec.title)
        out = Path(spec.output)
        out.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out, dpi=160, bbox_inches="tight")
    finally:
        plt.close(fig)
    return str(spec.output)
