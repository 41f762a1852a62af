"""Volume of a ball intersected with a convex cell, and a brute-force density oracle.

The exact paths integrate over a fan of triangles around the foot of the
perpendicular from the ball centre. In 3D the divergence theorem applied to
the field ``y/3`` (inside the ball) and ``t^3 y / (3|y|^3)`` (outside) turns
the volume into a sum over faces of ``h_F/3 * integral_F min(1, t^3/|y|^3)``,
and each face integral has a closed form per fan triangle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.spatial import cKDTree

from . import lattice as lat
from .errors import NonFiniteCell
from .polytope import Interval, Polygon, Polyhedron, _plane_basis, simplices

Method = Literal["exact1d", "exact2d", "exact3d", "monte_carlo"]


@dataclass(frozen=True)
class VolumeEstimate:
    value: float
    stderr: float
    method: str
    samples: int = 0
    seed: int | None = None


@dataclass(frozen=True)
class McConfig:
    samples: int = 200_000
    seed: int = 0
    method: Literal["auto", "exact", "monte_carlo"] = "auto"


def _geometry(cell):
    geom = getattr(cell, "geometry", cell)
    if not isinstance(geom, (Interval, Polygon, Polyhedron)):
        raise NonFiniteCell("cell has no bounded geometry")
    if not np.all(np.isfinite(geom.vertices)):
        raise NonFiniteCell("cell is unbounded")
    return geom


# -- fan tables ----------------------------------------------------------------

@dataclass
class FanTable:
    """Per-edge data of a fan decomposition around the ball centre.

    ``weight`` carries the orientation sign (and ``h/3`` in 3D); ``h`` is the
    distance from the centre to the face plane (zeros in 2D).
    """

    dim: int
    e: np.ndarray
    a_lo: np.ndarray
    a_hi: np.ndarray
    weight: np.ndarray
    h: np.ndarray

    @staticmethod
    def concat(tables: list["FanTable"]) -> "FanTable":
        dim = tables[0].dim
        return FanTable(dim, *(np.concatenate([getattr(t, f) for t in tables]) for f in ("e", "a_lo", "a_hi", "weight", "h")))


def _edges_2d(pts: np.ndarray, tiny: float):
    """Edge fan data for a ccw loop given relative to the foot point."""
    a = pts
    b = np.roll(pts, -1, axis=0)
    d = b - a
    length = np.linalg.norm(d, axis=1)
    ok = length > tiny
    a, b, d, length = a[ok], b[ok], d[ok], length[ok]
    dh = d / length[:, None]
    cross = a[:, 0] * dh[:, 1] - a[:, 1] * dh[:, 0]
    e = np.abs(cross)
    ok = e > tiny
    a_lo = np.einsum("ij,ij->i", a, dh)[ok]
    a_hi = np.einsum("ij,ij->i", b, dh)[ok]
    return e[ok], a_lo, a_hi, np.sign(cross[ok])


def fan_table(cell, center) -> FanTable:
    geom = _geometry(cell)
    c = np.asarray(center, float)
    scale = max(1.0, float(np.max(np.abs(geom.vertices - c))))
    tiny = 1e-14 * scale
    if isinstance(geom, Polygon):
        e, lo, hi, s = _edges_2d(geom.vertices - c, tiny)
        return FanTable(2, e, lo, hi, s, np.zeros_like(e))
    if isinstance(geom, Polyhedron):
        parts = []
        v = geom.vertices
        for f, loop in enumerate(geom.faces):
            n = geom.normals[f]
            h = float(geom.offsets[f] - n @ c)
            if abs(h) <= tiny:
                continue
            u, w = _plane_basis(n)
            rel = v[loop] - (c + h * n)
            pts = np.stack([rel @ u, rel @ w], axis=1)
            e, lo, hi, s = _edges_2d(pts, tiny)
            parts.append((e, lo, hi, s * h / 3.0, np.full(len(e), h)))
        if not parts:
            z = np.zeros(0)
            return FanTable(3, z, z, z, z, z)
        return FanTable(3, *(np.concatenate(col) for col in zip(*parts)))
    raise TypeError("fan tables are defined for 2D and 3D cells")


def fan_volumes(table: FanTable, ts, chunk: int = 4096) -> np.ndarray:
    """Sum of fan contributions for each radius in ``ts``."""
    ts = np.atleast_1d(np.asarray(ts, float))
    out = np.zeros(len(ts))
    if len(table.e) == 0:
        return out
    t = ts[None, :]
    for start in range(0, len(table.e), chunk):
        sl = slice(start, start + chunk)
        e = table.e[sl, None]
        aa = table.a_lo[sl, None]
        ab = table.a_hi[sl, None]
        wt = table.weight[sl, None]
        if table.dim == 2:
            rho2 = np.broadcast_to(t * t, (e.shape[0], len(ts)))
        else:
            h = table.h[sl, None]
            rho2 = np.maximum(t * t - h * h, 0.0)
        w = np.sqrt(np.maximum(rho2 - e * e, 0.0))
        lo = np.maximum(aa, -w)
        hi = np.minimum(ab, w)
        has_inner = hi > lo
        inner = 0.5 * e * np.where(has_inner, hi - lo, 0.0)
        dphi = np.arctan2(ab, e) - np.arctan2(aa, e)
        dphi_in = np.where(has_inner, np.arctan2(hi, e) - np.arctan2(lo, e), 0.0)
        dphi_out = dphi - dphi_in
        if table.dim == 2:
            outer = 0.5 * t * t * dphi_out
        else:
            ah = np.abs(h)
            k = ah / np.sqrt(h * h + e * e)

            def W(a):
                return np.arcsin(np.clip(k * a / np.sqrt(a * a + e * e), -1.0, 1.0)) / ah

            j_out = (W(ab) - W(aa)) - np.where(has_inner, W(hi) - W(lo), 0.0)
            with np.errstate(divide="ignore", invalid="ignore"):
                c0 = np.where(ah < t, 0.5 * (3.0 * t * t - h * h), t ** 3 / ah)
            outer = c0 * dphi_out - t ** 3 * j_out
        out += np.sum(wt * (inner + outer), axis=0)
    return out


def exact_ball_volumes(cell, center, ts) -> np.ndarray:
    """Exact ``Vol(cell & B(center, t))`` for every ``t`` in ``ts``."""
    geom = _geometry(cell)
    ts = np.atleast_1d(np.asarray(ts, float))
    if isinstance(geom, Interval):
        c = float(np.asarray(center, float).reshape(-1)[0])
        return np.maximum(0.0, np.minimum(geom.hi, c + ts) - np.maximum(geom.lo, c - ts))
    return np.maximum(fan_volumes(fan_table(geom, center), ts), 0.0)


def _sample_simplex(corners: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    w = rng.exponential(size=(n, corners.shape[0]))
    w /= w.sum(axis=1, keepdims=True)
    return w @ corners


def mc_ball_volumes(cell, center, ts, samples: int, seed) -> tuple[np.ndarray, np.ndarray]:
    """Stratified Monte Carlo estimate of ``Vol(cell & B(center, t))``.

    Strata are the simplices of a fan decomposition, sampled uniformly with
    counts proportional to their volume; one sample set serves all radii.
    Returns (values, standard errors).
    """
    geom = _geometry(cell)
    ts = np.atleast_1d(np.asarray(ts, float))
    c = np.asarray(center, float)
    rng = np.random.default_rng(seed)
    corners, vols = simplices(geom)
    total = float(vols.sum())
    counts = np.maximum(1, np.round(samples * vols / total).astype(int))
    value = np.zeros(len(ts))
    var = np.zeros(len(ts))
    for cs, vol, m in zip(corners, vols, counts):
        if vol <= 0:
            continue
        x = _sample_simplex(cs, int(m), rng)
        dist = np.sort(np.linalg.norm(x - c, axis=1))
        hits = np.searchsorted(dist, ts, side="right")
        value += vol * hits / m
        # smoothed proportion keeps the error bar honest when no sample misses
        p = (hits + 1.0) / (m + 2.0)
        var += vol * vol * p * (1 - p) / m
    return value, np.sqrt(var)


def ball_cell_volume(cell, center, t: float, cfg: McConfig | None = None) -> VolumeEstimate:
    """Volume of the intersection of the closed ball ``B(center, t)`` with a convex cell."""
    if t < 0:
        raise ValueError("radius must be nonnegative")
    cfg = cfg or McConfig()
    geom = _geometry(cell)
    if cfg.method == "monte_carlo":
        val, err = mc_ball_volumes(geom, center, [t], cfg.samples, cfg.seed)
        return VolumeEstimate(float(val[0]), float(err[0]), "monte_carlo", cfg.samples, cfg.seed)
    value = float(exact_ball_volumes(geom, center, [t])[0])
    return VolumeEstimate(value, 0.0, f"exact{geom.dim}d")


# -- brute-force oracle ------------------------------------------------------------

def _oracle_samples(pset: lat.PeriodicSet, mode: str, n: int, seed: int) -> np.ndarray:
    d = pset.dim
    if mode == "grid":
        m = max(1, int(round(n ** (1.0 / d))))
        axes = [(np.arange(m) + 0.5) / m for _ in range(d)]
        frac = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    elif mode in ("monte_carlo", "mc"):
        frac = np.random.default_rng(seed).random((n, d))
    else:
        raise ValueError(f"unknown oracle mode {mode!r}")
    return pset.lattice.to_cartesian(frac)


def oracle_psi(pset: lat.PeriodicSet, kmax: int, t: float, mode: str = "grid", n: int = 10_000, seed: int = 0) -> list[float]:
    """Fraction of the unit cell covered by at least k balls of radius t, k = 1..kmax.

    Counts, for sample points of the unit cell, how many points of the set lie
    within distance ``t``. Independent of any zone construction.
    """
    if n < 1 or t < 0:
        raise ValueError("need n >= 1 and t >= 0")
    x = _oracle_samples(pset, mode, n, seed)
    if t == 0:
        return [0.0] * kmax
    tree = cKDTree(lat._cell_cloud(pset, t))
    counts = np.concatenate([
        tree.query_ball_point(x[i:i + 65536], t, return_length=True) for i in range(0, len(x), 65536)
    ])
    return [float(np.mean(counts >= k)) for k in range(1, kmax + 1)]


def oracle_psi_table(pset: lat.PeriodicSet, kmax: int, tgrid, mode: str = "grid", n: int = 100_000, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Oracle densities on a radius grid.

    Returns ``(psi, stderr)`` with ``psi[k, j]`` for ``k = 0..kmax`` computed from
    the distance of each sample point to its k-th nearest point of the set.
    ``stderr`` is binomial for Monte Carlo sampling and zero for the grid.
    """
    tgrid = np.asarray(tgrid, float)
    x = _oracle_samples(pset, mode, n, seed)
    d = pset.dim
    big_r = lat.covering_radius(pset)
    reach = big_r * ((kmax + 1) ** (1.0 / d) + 1.0)
    tree = cKDTree(lat._cell_cloud(pset, reach))
    psi = np.zeros((kmax + 1, len(tgrid)))
    psi[0] = 1.0
    if kmax >= 1:
        dist, _ = tree.query(x, k=kmax)
        dist = dist.reshape(len(x), kmax)
        for k in range(1, kmax + 1):
            dk = np.sort(dist[:, k - 1])
            psi[k] = np.searchsorted(dk, tgrid, side="right") / len(x)
    if mode == "grid":
        stderr = np.zeros_like(psi)
    else:
        stderr = np.sqrt(psi * (1 - psi) / len(x))
    return psi, stderr
