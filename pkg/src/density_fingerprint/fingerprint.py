"""Density functions of a periodic set assembled from Brillouin zones, and the fingerprint distance."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from . import lattice as lat
from . import volumes as vol
from . import zones as zn
from .errors import ConsistencyError, GridMismatch

RHO_TOL = 1e-6
TILING_RTOL = 1e-6


@dataclass(frozen=True, eq=False)
class DensityTable:
    """``psi[k, j]`` and ``rho[k, j]`` for ``k = 0..kmax`` on the radius grid ``tgrid``.

    ``psi`` holds one extra row (``k = kmax + 1``) so that the last density
    function is complete. ``psi_stderr`` is nonzero only for sampled methods.
    """

    kmax: int
    dim: int
    tgrid: np.ndarray
    psi: np.ndarray
    rho: np.ndarray
    psi_stderr: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.psi.shape != (self.kmax + 2, len(self.tgrid)):
            raise ValueError("psi must have kmax+2 rows and one column per radius")
        if self.rho.shape != (self.kmax + 1, len(self.tgrid)):
            raise ValueError("rho must have kmax+1 rows and one column per radius")


@dataclass(frozen=True)
class FingerprintConfig:
    kmax: int = 8
    t_steps: int = 256
    t_max: float | None = None
    method: Literal["zones", "oracle"] = "zones"
    volume_method: Literal["exact", "monte_carlo"] = "exact"
    mc_samples: int = 200_000
    seed: int = 0
    jitter: bool = False

    def __post_init__(self):
        if self.kmax < 1:
            raise ValueError("kmax must be at least 1")
        if self.t_steps < 2:
            raise ValueError("t_steps must be at least 2")
        if self.method not in ("zones", "oracle"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.volume_method not in ("exact", "monte_carlo"):
            raise ValueError(f"unknown volume method {self.volume_method!r}")


def set_hash(pset: lat.PeriodicSet) -> str:
    h = hashlib.sha256()
    h.update(np.round(pset.lattice.basis, 12).tobytes())
    h.update(np.round(pset.motif, 12).tobytes())
    return h.hexdigest()[:16]


def vanishing_radius(R: float, k: int, d: int) -> float:
    """Radius beyond which ``rho_k`` is identically zero."""
    return R * ((k + 1) ** (1.0 / d) + 1.0)


def default_tgrid(pset: lat.PeriodicSet, kmax: int, steps: int, R: float | None = None) -> np.ndarray:
    """Uniform radii on ``[0, R((kmax+1)^(1/d) + 1)]`` with both endpoints."""
    if steps < 2:
        raise ValueError("steps must be at least 2")
    if R is None:
        R = lat.covering_radius(pset)
    return np.linspace(0.0, vanishing_radius(R, kmax, pset.dim), steps)


def _tgrid_for(pset, cfg: FingerprintConfig) -> np.ndarray:
    if cfg.t_max is None:
        return default_tgrid(pset, cfg.kmax, cfg.t_steps)
    if cfg.t_max <= 0:
        raise ValueError("t_max must be positive")
    return np.linspace(0.0, float(cfg.t_max), cfg.t_steps)


def _belt_reach(zc: zn.ZoneComplex, cells) -> tuple[float, float]:
    """Lower bound on the distance from the centre to the belt, and its largest vertex distance."""
    c = zc.center
    near = min(max(0.0, float(np.max(cell.normals @ c - cell.offsets))) for cell in cells)
    far = max(float(np.max(np.linalg.norm(cell.vertices - c, axis=1))) for cell in cells)
    return near, far


def _zone_stats(zc: zn.ZoneComplex, k: int, ts: np.ndarray, cfg: FingerprintConfig, stream: int):
    """Ball-intersection volumes of belt ``k`` on ``ts``, its full volume, and stderr."""
    cells = zc.belt(k)
    near, far = _belt_reach(zc, cells)
    if zc.center.shape[0] == 1 or cfg.volume_method == "exact":
        probe = np.append(ts, 2.0 * far + 1.0)
        if zc.center.shape[0] == 1:
            full = sum(vol.exact_ball_volumes(c, zc.center, probe) for c in cells)
        else:
            table = vol.FanTable.concat([vol.fan_table(c, zc.center) for c in cells])
            full = vol.fan_volumes(table, probe)
        vals, total = full[:-1], float(full[-1])
        err = np.zeros_like(ts)
    else:
        vals = np.zeros_like(ts)
        var = np.zeros_like(ts)
        volumes = [c.volume() for c in cells]
        total = float(sum(volumes))
        for ci, (cell, cell_vol) in enumerate(zip(cells, volumes)):
            n = max(64, int(round(cfg.mc_samples * cell_vol / total)))
            seed = np.random.SeedSequence([cfg.seed, stream, k, ci])
            v, e = vol.mc_ball_volumes(cell, zc.center, ts, n, seed)
            vals += v
            var += e * e
        err = np.sqrt(var)
    # the ball misses the belt below `near` and swallows it beyond `far`
    vals = np.clip(vals, 0.0, total)
    vals[ts < near] = 0.0
    vals[ts >= far] = total
    err[(ts < near) | (ts >= far)] = 0.0
    return vals, total, err


def rho_from_psi(psi: np.ndarray) -> np.ndarray:
    """``rho[k] = psi[k] - psi[k+1]``; slightly negative round-off is clamped to zero."""
    psi = np.asarray(psi, float)
    rho = psi[:-1] - psi[1:]
    worst = float(rho.min()) if rho.size else 0.0
    if worst < -RHO_TOL:
        raise ConsistencyError(f"psi is not monotone in k (rho reaches {worst:.3g})")
    return np.clip(rho, 0.0, 1.0)


def _zone_psi(pset: lat.PeriodicSet, cfg: FingerprintConfig, tgrid: np.ndarray):
    kmax = cfg.kmax
    vol_u = pset.lattice.volume
    mult = zn.multiplicity(pset)
    acc = np.zeros((kmax + 2, len(tgrid)))
    var = np.zeros_like(acc)
    totals = np.zeros(kmax + 2)
    cutoffs = []
    for i in range(len(pset)):
        zc = zn.build_zones(pset, i, kmax + 1)
        cutoffs.append(zc.cutoff)
        # every translate of p inside the origin's lattice Voronoi domain carries weight 1/m
        weight = float(sum(mult[i].weights()))
        for k in range(1, kmax + 2):
            vals, total, err = _zone_stats(zc, k, tgrid, cfg, i)
            acc[k] += weight * vals
            var[k] += (weight * err) ** 2
            totals[k] += weight * total
    residual = np.abs(totals[1:] - vol_u) / vol_u
    if float(residual.max()) > TILING_RTOL:
        raise ConsistencyError(f"zones do not tile the unit cell (relative residual {residual.max():.3g})")
    psi = np.ones_like(acc)
    psi[1:] = acc[1:] / totals[1:, None]
    stderr = np.sqrt(var)
    stderr[1:] /= totals[1:, None]
    meta = {
        "tiling_residual": float(residual.max()),
        "cutoffs": cutoffs,
        "multiplicities": [e.multiplicity for e in mult.entries],
    }
    return np.clip(psi, 0.0, 1.0), stderr, meta


def psi_table(pset: lat.PeriodicSet, cfg: FingerprintConfig | None = None, tgrid=None) -> DensityTable:
    """Density functions ``psi_0..psi_{kmax+1}`` and ``rho_0..rho_kmax`` of a periodic set.

    The zone method sums, over motif points ``a``, the volume of the k-th
    Brillouin zone of ``a`` inside the ball of radius ``t`` about ``a``, divided
    by the volume of the unit cell. The zones of all points tile space, so the
    computed belt volumes are used as the denominator; their mismatch with the
    unit cell volume is checked and recorded as ``meta["tiling_residual"]``.
    """
    cfg = cfg or FingerprintConfig()
    pset = lat.canonicalize(pset)
    tgrid = _tgrid_for(pset, cfg) if tgrid is None else np.asarray(tgrid, float)
    if tgrid.ndim != 1 or len(tgrid) < 1 or np.any(np.diff(tgrid) < 0) or tgrid[0] < 0:
        raise ValueError("tgrid must be a nonempty nondecreasing list of nonnegative radii")
    meta = {"set_hash": set_hash(pset), "method": cfg.method, "seed": cfg.seed}
    if cfg.method == "oracle":
        psi, stderr = vol.oracle_psi_table(pset, cfg.kmax + 1, tgrid, mode="monte_carlo", n=cfg.mc_samples, seed=cfg.seed)
        meta["volume_method"] = "oracle_monte_carlo"
    else:
        work = zn.jittered(pset, 1e-7 * lat.packing_radius(pset), cfg.seed) if cfg.jitter else pset
        psi, stderr, extra = _zone_psi(work, cfg, tgrid)
        meta.update(extra)
        meta["volume_method"] = "exact" if pset.dim == 1 else cfg.volume_method
        meta["jitter"] = cfg.jitter
    rho = rho_from_psi(psi)
    return DensityTable(cfg.kmax, pset.dim, tgrid, psi, rho, stderr, meta)


def fingerprint_distance(fa: DensityTable, fb: DensityTable, per_k: bool = False):
    """``max_k (k+1)^(-(d-1)/d) * max_t |rho_a[k](t) - rho_b[k](t)|``.

    With ``per_k=True`` the undamped per-k maxima are returned as well.
    """
    if fa.kmax != fb.kmax or fa.dim != fb.dim or len(fa.tgrid) != len(fb.tgrid) or not np.array_equal(fa.tgrid, fb.tgrid):
        raise GridMismatch("tables must share kmax, dimension and radius grid")
    diff = np.max(np.abs(fa.rho - fb.rho), axis=1)
    k = np.arange(fa.kmax + 1)
    damped = diff * (k + 1.0) ** (-(fa.dim - 1) / fa.dim)
    value = float(damped.max())
    return (value, diff) if per_k else value


__all__ = [
    "DensityTable",
    "FingerprintConfig",
    "default_tgrid",
    "psi_table",
    "rho_from_psi",
    "fingerprint_distance",
    "vanishing_radius",
    "set_hash",
]
