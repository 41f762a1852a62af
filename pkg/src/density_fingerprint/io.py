"""Text formats: PPS structure files, density CSV, zone geometry and stability reports.

PPS layout::

    # comment
    dim 2
    basis            # one basis vector per row
    1 0
    0 1
    motif [count]    # fractional coordinates, optional trailing label
    0 0 Na
"""

from __future__ import annotations

import csv
import io as _io
import math
from dataclasses import dataclass, field

import numpy as np

from . import lattice as lat
from .errors import ParseError
from .fingerprint import DensityTable


@dataclass
class PpsDocument:
    dim: int
    basis_rows: list[list[float]]
    motif_rows: list[list[float]]
    labels: list[str] | None = None
    comments: list[str] = field(default_factory=list)

    def to_periodic_set(self) -> lat.PeriodicSet:
        return lat.periodic_set(self.basis_rows, self.motif_rows, self.labels)


def _numbers(tokens: list[str], lineno: int, line: str) -> list[float]:
    out = []
    for tok in tokens:
        try:
            v = float(tok)
        except ValueError:
            col = line.find(tok) + 1
            raise ParseError(lineno, f"column {col}: expected a number, got {tok!r}") from None
        if not math.isfinite(v):
            col = line.find(tok) + 1
            raise ParseError(lineno, f"column {col}: non-finite number {tok!r}")
        out.append(v)
    return out


def parse_pps_document(text: str) -> PpsDocument:
    dim = None
    basis: list[list[float]] = []
    motif: list[list[float]] = []
    labels: list[str | None] = []
    comments: list[str] = []
    declared = None
    section = None
    last = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body, _, comment = raw.partition("#")
        if comment.strip():
            comments.append(comment.strip())
        tokens = body.split()
        if not tokens:
            continue
        last = lineno
        key = tokens[0].lower()
        if key == "dim":
            if dim is not None:
                raise ParseError(lineno, "dim given twice")
            if len(tokens) != 2 or tokens[1] not in ("1", "2", "3"):
                raise ParseError(lineno, "expected 'dim 1', 'dim 2' or 'dim 3'")
            dim = int(tokens[1])
            continue
        if key in ("basis", "motif"):
            if dim is None:
                raise ParseError(lineno, f"'{key}' before 'dim'")
            if key == "motif":
                if len(basis) != dim:
                    raise ParseError(lineno, f"basis needs {dim} rows, found {len(basis)}")
                if len(tokens) > 2:
                    raise ParseError(lineno, "expected 'motif' or 'motif <count>'")
                if len(tokens) == 2:
                    try:
                        declared = int(tokens[1])
                    except ValueError:
                        raise ParseError(lineno, f"motif count must be an integer, got {tokens[1]!r}") from None
            elif len(tokens) != 1:
                raise ParseError(lineno, "expected 'basis' on its own line")
            section = key
            continue
        if section == "basis":
            if len(basis) == dim:
                raise ParseError(lineno, f"basis has more than {dim} rows")
            if len(tokens) != dim:
                raise ParseError(lineno, f"basis row needs {dim} numbers, found {len(tokens)}")
            basis.append(_numbers(tokens, lineno, raw))
        elif section == "motif":
            if len(tokens) not in (dim, dim + 1):
                raise ParseError(lineno, f"motif row needs {dim} numbers and an optional label, found {len(tokens)} tokens")
            motif.append(_numbers(tokens[:dim], lineno, raw))
            labels.append(tokens[dim] if len(tokens) > dim else None)
        else:
            raise ParseError(lineno, f"unexpected content {tokens[0]!r}")
    if dim is None:
        raise ParseError(max(last, 1), "missing 'dim'")
    if len(basis) != dim:
        raise ParseError(max(last, 1), f"basis needs {dim} rows, found {len(basis)}")
    if not motif:
        raise ParseError(max(last, 1), "motif is empty")
    if declared is not None and declared != len(motif):
        raise ParseError(last, f"motif declares {declared} points but lists {len(motif)}")
    if any(lab is None for lab in labels) and any(lab is not None for lab in labels):
        raise ParseError(last, "either every motif row has a label or none does")
    names = None if labels[0] is None else [str(x) for x in labels]
    return PpsDocument(dim, basis, motif, names, comments)


def parse_pps(text: str) -> lat.PeriodicSet:
    """Parse PPS text into a canonical periodic set."""
    return parse_pps_document(text).to_periodic_set()


def read_pps(path) -> lat.PeriodicSet:
    with open(path, encoding="utf-8") as fh:
        return parse_pps(fh.read())


def write_pps(pset: lat.PeriodicSet, comment: str | None = None) -> str:
    """Serialize a periodic set; numbers are written with full precision."""
    lines = []
    if comment:
        lines += [f"# {c}" for c in comment.splitlines()]
    lines.append(f"dim {pset.dim}")
    lines.append("basis")
    for row in pset.lattice.basis.T:
        lines.append(" ".join(repr(float(v)) for v in row))
    lines.append(f"motif {len(pset)}")
    for i, row in enumerate(pset.motif):
        text = " ".join(repr(float(v)) for v in row)
        if pset.labels is not None:
            text += f" {pset.labels[i]}"
        lines.append(text)
    return "\n".join(lines) + "\n"


# -- density CSV -----------------------------------------------------------------

def _fmt(v: float) -> str:
    s = f"{float(v):.9g}"
    return "0" if s == "-0" else s


def write_density_csv(table: DensityTable) -> str:
    """CSV with header ``t,psi_0..psi_K,rho_0..rho_K`` and 9 significant digits."""
    if len(table.tgrid) == 0:
        raise ValueError("empty radius grid")
    k = table.kmax
    header = ["t"] + [f"psi_{i}" for i in range(k + 1)] + [f"rho_{i}" for i in range(k + 1)]
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for j, t in enumerate(table.tgrid):
        w.writerow([_fmt(t)] + [_fmt(v) for v in table.psi[: k + 1, j]] + [_fmt(v) for v in table.rho[:, j]])
    return buf.getvalue()


def read_density_csv(text: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Inverse of :func:`write_density_csv`: ``(tgrid, psi[0..K], rho[0..K])``."""
    rows = list(csv.reader(_io.StringIO(text)))
    if not rows or rows[0][0] != "t":
        raise ValueError("not a density CSV")
    header = rows[0]
    n_psi = sum(1 for h in header if h.startswith("psi_"))
    data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(-1, len(header))
    return data[:, 0], data[:, 1:1 + n_psi].T, data[:, 1 + n_psi:].T


# -- zone geometry -----------------------------------------------------------------

def export_zone_geometry(zc) -> str:
    """One record per cell: depth, vertices and halfspaces ``n . x <= c``."""
    d = len(zc.center)
    lines = [
        f"zones motif_index {zc.motif_index} kmax {zc.kmax} dim {d}",
        "center " + " ".join(_fmt(v) for v in zc.center),
        f"cutoff {_fmt(zc.cutoff)} clip_halfwidth {_fmt(zc.clip_halfwidth)}",
    ]
    for i, cell in enumerate(zc.cells):
        verts = _ordered_vertices(cell)
        lines.append(f"cell {i} depth {cell.depth} belt {cell.depth + 1}")
        lines.append(f"vertices {len(verts)}")
        lines += ["  " + " ".join(_fmt(v) for v in p) for p in verts]
        lines.append(f"halfspaces {len(cell.offsets)}")
        for n, c, lab in zip(cell.normals, cell.offsets, cell.labels):
            lines.append("  " + " ".join(_fmt(v) for v in n) + f" {_fmt(c)} {lab}")
        lines.append("end")
    return "\n".join(lines) + "\n"


def _ordered_vertices(cell) -> np.ndarray:
    v = np.asarray(cell.vertices, float)
    if v.shape[1] == 1:
        return v[np.argsort(v[:, 0])]
    if v.shape[1] == 2:
        return v  # polygons are stored counter-clockwise
    order = np.lexsort(np.round(v, 12).T[::-1])
    return v[order]


# -- stability report ----------------------------------------------------------------

def write_stability_csv(report) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["trial", "d_B", "d_F", "ratio", "bound"])
    for row in report.rows:
        w.writerow([row.trial, _fmt(row.d_B), _fmt(row.d_F), _fmt(row.ratio), "" if row.bound is None else _fmt(row.bound)])
    return buf.getvalue()


__all__ = [
    "PpsDocument",
    "parse_pps_document",
    "parse_pps",
    "read_pps",
    "write_pps",
    "write_density_csv",
    "read_density_csv",
    "export_zone_geometry",
    "write_stability_csv",
]
