"""Result tables and their CSV / SVG renderings."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np


class EmitError(RuntimeError):
    pass


@dataclass
class PlotSpec:
    x: str
    y: Sequence[str]
    group: Optional[str] = None
    xlabel: Optional[str] = None
    ylabel: Optional[str] = None
    logx: bool = False
    title: str = ""


@dataclass
class ResultTable:
    columns: list[str]
    rows: np.ndarray
    metadata: dict = field(default_factory=dict)
    plot: Optional[PlotSpec] = None

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=float).reshape(-1, len(self.columns))

    @classmethod
    def from_records(cls, columns, records, **kw) -> "ResultTable":
        return cls(list(columns), np.array(records, dtype=float).reshape(-1, len(columns)), **kw)

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.columns.index(name)]

    def __len__(self):
        return self.rows.shape[0]


def _fmt(v: float) -> str:
    s = f"{v:.12g}"
    return "0" if s == "-0" else s


def to_csv(table: ResultTable) -> str:
    bad = np.flatnonzero(~np.all(np.isfinite(table.rows), axis=1))
    if bad.size:
        raise EmitError(f"non-finite value in row {int(bad[0])}; refusing to emit")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def read_csv(path: str | Path) -> ResultTable:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = [[float(v) for v in line] for line in r]
    return ResultTable(header, np.array(rows, dtype=float).reshape(-1, len(header)))


def _render_svg(table: ResultTable, path: Path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    spec = table.plot or PlotSpec(table.columns[0], table.columns[1:2])
    with matplotlib.rc_context({"svg.hashsalt": "radargame", "font.size": 9,
                                "axes.grid": True, "grid.alpha": 0.3}):
        fig, ax = plt.subplots(figsize=(5.0, 3.4))
        x = table.column(spec.x)
        groups = [(None, np.ones(len(table), dtype=bool))]
        if spec.group is not None:
            g = table.column(spec.group)
            groups = [(v, g == v) for v in dict.fromkeys(g.tolist())]
        for gval, mask in groups:
            for yname in spec.y:
                label = yname if gval is None else f"{spec.group}={gval:g}"
                if gval is not None and len(spec.y) > 1:
                    label += f" {yname}"
                ax.plot(x[mask], table.column(yname)[mask], marker="o" if mask.sum() < 40 else None,
                        markersize=3, linewidth=1.2, label=label)
        if spec.logx:
            ax.set_xscale("log")
        ax.set_xlabel(spec.xlabel or spec.x)
        ax.set_ylabel(spec.ylabel or ", ".join(spec.y))
        if spec.title:
            ax.set_title(spec.title)
        if len(groups) > 1 or len(spec.y) > 1:
            ax.legend(frameon=False, fontsize=8)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def emit(table: ResultTable, fmt: str, path: str | Path) -> Path:
    """Write ``table`` as ``csv`` or ``svg`` to ``path``; metadata goes to a JSON sidecar with the CSV."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        if fmt == "csv":
            text = to_csv(table)
            path.write_text(text, newline="")
            path.with_suffix(".meta.json").write_text(
                json.dumps(table.metadata, sort_keys=True, indent=1, default=_jsonable) + "\n")
        elif fmt == "svg":
            if not np.all(np.isfinite(table.rows)):
                bad = int(np.flatnonzero(~np.all(np.isfinite(table.rows), axis=1))[0])
                raise EmitError(f"non-finite value in row {bad}; refusing to emit")
            _render_svg(table, path)
        else:
            raise EmitError(f"unknown format {fmt!r}")
    except OSError as exc:
        raise EmitError(f"{path}: {exc.strerror or exc}") from None
    return path


def _jsonable(v):
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    return str(v)
