"""Result tables, run manifests and SVG plots."""
from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import io as _io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__

CONVERGENCE_COLUMNS = ("epsilon", "sup_h1_error", "sup_l2_error", "mass_drift", "wall_time_seconds")


@dataclass
class ResultTable:
    columns: list
    rows: list
    provenance: dict = field(default_factory=dict)
    nullable: tuple = ()

    def __post_init__(self):
        self.columns = list(self.columns)
        self.rows = [tuple(_clean(v) for v in row) for row in self.rows]
        self.nullable = tuple(self.nullable)
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError(f"row {row} has {len(row)} entries, expected {len(self.columns)}")
            for name, v in zip(self.columns, row):
                if v is None and name not in self.nullable:
                    raise ValueError(f"column {name!r} is not nullable but holds a missing value")

    def column(self, name):
        k = self.columns.index(name)
        return [row[k] for row in self.rows]


def _clean(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return None if math.isnan(v) else v
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _parse(text):
    if text == "":
        return None
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def table_bytes(table: ResultTable, fmt: str = "csv") -> bytes:
    if fmt == "csv":
        buf = _io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([_fmt(v) for v in row])
        return buf.getvalue().encode()
    if fmt == "json":
        doc = {"columns": table.columns, "rows": [list(r) for r in table.rows],
               "provenance": table.provenance, "nullable": list(table.nullable)}
        return (json.dumps(doc, indent=1, sort_keys=True) + "\n").encode()
    raise ValueError(f"unknown format {fmt!r} (expected csv or json)")


def write_results(table: ResultTable, fmt: str, path) -> None:
    """Write ``table`` as CSV (17 significant digits) or JSON."""
    data = table_bytes(table, fmt)
    path = Path(path)
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc.strerror}") from exc


def read_results(path) -> ResultTable:
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        doc = json.loads(text)
        return ResultTable(doc["columns"], [tuple(r) for r in doc["rows"]],
                           doc.get("provenance", {}), tuple(doc.get("nullable", ())))
    reader = csv.reader(_io.StringIO(text))
    header = next(reader)
    rows = [tuple(_parse(v) for v in row) for row in reader]
    nullable = tuple(c for k, c in enumerate(header) if any(r[k] is None for r in rows))
    return ResultTable(header, rows, nullable=nullable)


# --- manifests ----------------------------------------------------------------

@dataclass
class RunManifest:
    subcommand: str
    config: dict
    seed: int
    outputs: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    version: str = __version__
    created: str = field(default_factory=lambda: _dt.datetime.now(_dt.timezone.utc).isoformat())

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        return cls(**json.loads(text))

    def digest(self) -> str:
        snap = json.dumps({"subcommand": self.subcommand, "config": self.config, "seed": self.seed},
                          sort_keys=True)
        return hashlib.sha256(snap.encode()).hexdigest()[:16]


def write_manifest(manifest: RunManifest, path) -> None:
    Path(path).write_text(manifest.to_json())


def read_manifest(path) -> RunManifest:
    return RunManifest.from_json(Path(path).read_text())


# --- plotting -----------------------------------------------------------------

def emit_plot(table: ResultTable, x_col: str, y_col: str, scale: str = "loglog", path="plot.svg",
              fit: bool = True) -> float | None:
    """Render ``y_col`` against ``x_col`` as a standalone SVG.

    On log-log axes with at least two points a least-squares line is drawn
    and annotated with its slope ("order"); the slope is returned.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    for name in (x_col, y_col):
        if name not in table.columns:
            raise ValueError(f"column {name!r} not in table (have {table.columns})")
    if scale not in ("linear", "loglog"):
        raise ValueError(f"scale must be 'linear' or 'loglog', got {scale!r}")
    pts = [(x, y) for x, y in zip(table.column(x_col), table.column(y_col)) if x is not None and y is not None]
    x = np.array([p[0] for p in pts], dtype=float)
    y = np.array([p[1] for p in pts], dtype=float)
    if scale == "loglog" and (np.any(x <= 0) or np.any(y <= 0)):
        raise ValueError("log-log plot needs strictly positive values")

    slope = None
    with matplotlib.rc_context({"svg.hashsalt": "dmnls", "svg.fonttype": "path"}):
        fig, ax = plt.subplots(figsize=(5, 4))
        ax.plot(x, y, "o", color="C0", label=y_col)
        if scale == "loglog":
            ax.set_xscale("log")
            ax.set_yscale("log")
            if fit and len(x) >= 2:
                slope, icpt = np.polyfit(np.log(x), np.log(y), 1)
                xs = np.geomspace(x.min(), x.max(), 50)
                ax.plot(xs, np.exp(icpt) * xs**slope, "--", color="C1")
                ax.annotate(f"order ≈ {slope:.2f}", xy=(0.05, 0.9), xycoords="axes fraction")
        ax.set_xlabel(x_col)
        ax.set_ylabel(y_col)
        ax.grid(True, which="both", alpha=0.3)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return None if slope is None else float(slope)
