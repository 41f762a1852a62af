"""Bottleneck distance over a common lattice and a perturbation harness for the Lipschitz bound."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from . import lattice as lat
from .errors import DeltaTooLarge, MotifCardinalityMismatch, NoCommonLattice
from .fingerprint import FingerprintConfig, fingerprint_distance, psi_table

BOUND_SLACK = 1e-9


def _normalized_basis(lattice: lat.Lattice) -> np.ndarray:
    """Reduced basis with columns sorted by norm and each column's first nonzero entry positive."""
    red = lat.reduce_basis(lattice).basis.copy()
    scale = float(np.max(np.abs(red)))
    for j in range(red.shape[1]):
        col = red[:, j]
        lead = col[np.abs(col) > 1e-9 * scale]
        if lead.size and lead[0] < 0:
            red[:, j] = -col
    keys = [(round(float(np.linalg.norm(c)), 9), tuple(np.round(c, 9))) for c in red.T]
    order = sorted(range(red.shape[1]), key=lambda j: keys[j])
    return red[:, order]


def same_lattice(a: lat.Lattice, b: lat.Lattice, tol: float = 1e-9) -> bool:
    """True if the two bases span the same lattice (relative tolerance ``tol``)."""
    if a.dim != b.dim:
        return False
    scale = max(float(np.max(np.abs(a.basis))), float(np.max(np.abs(b.basis))))
    na, nb = _normalized_basis(a), _normalized_basis(b)
    if np.allclose(na, nb, rtol=0.0, atol=tol * scale):
        return True
    # reduced bases need not be unique: fall back to a unimodular change of basis
    t = np.linalg.solve(a.basis, b.basis)
    ti = np.rint(t)
    return bool(np.allclose(t, ti, rtol=0.0, atol=tol * max(1.0, float(np.max(np.abs(t)))))) and abs(abs(np.linalg.det(ti)) - 1.0) < 0.5


def common_lattice_check(a: lat.PeriodicSet, q: lat.PeriodicSet, tol: float = 1e-9) -> lat.Lattice:
    """The lattice shared by two periodic sets with equally many motif points."""
    if not same_lattice(a.lattice, q.lattice, tol):
        raise NoCommonLattice("the two sets are not given over the same lattice")
    if len(a) != len(q):
        raise MotifCardinalityMismatch(f"motif sizes differ ({len(a)} vs {len(q)})")
    return a.lattice


def torus_costs(a: lat.PeriodicSet, q: lat.PeriodicSet) -> np.ndarray:
    """``c[i, j]`` = distance between the lattice cosets of motif points ``i`` of ``a`` and ``j`` of ``q``."""
    pa, pq = a.positions, q.positions
    return np.array([[lat.torus_distance(a.lattice, x, y) for y in pq] for x in pa])


def _perfect_matching_exists(mask: np.ndarray) -> bool:
    match = maximum_bipartite_matching(csr_matrix(mask.astype(np.int8)), perm_type="column")
    return bool(np.all(match >= 0))


def bottleneck_from_costs(costs: np.ndarray) -> tuple[float, np.ndarray]:
    """Smallest threshold admitting a perfect matching, and one such matching."""
    values = np.unique(costs)
    lo, hi = 0, len(values) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _perfect_matching_exists(costs <= values[mid]):
            hi = mid
        else:
            lo = mid + 1
    best = float(values[lo])
    match = maximum_bipartite_matching(csr_matrix((costs <= best).astype(np.int8)), perm_type="column")
    return best, match


def bottleneck_distance(a: lat.PeriodicSet, q: lat.PeriodicSet, tol: float = 1e-9) -> float:
    """Bottleneck distance between two periodic sets over a common lattice.

    Matching lattice cosets of motif points with torus costs gives the
    distance between the full periodic sets.
    """
    common_lattice_check(a, q, tol)
    return bottleneck_from_costs(torus_costs(a, q))[0]


def perturb(pset: lat.PeriodicSet, delta: float, seed=0) -> lat.PeriodicSet:
    """Move every motif point by a uniform random vector from the ball of radius ``delta``."""
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    r = lat.packing_radius(pset)
    if delta >= r:
        raise DeltaTooLarge(f"delta {delta:.6g} is not below the packing radius {r:.6g}")
    if delta == 0:
        return lat.canonicalize(pset)
    rng = np.random.default_rng(seed)
    n, d = len(pset), pset.dim
    step = rng.normal(size=(n, d))
    step /= np.linalg.norm(step, axis=1, keepdims=True)
    step *= delta * rng.random(n)[:, None] ** (1.0 / d)
    pts = pset.positions + step
    return lat.PeriodicSet(pset.lattice, pset.lattice.to_fractional(pts), pset.labels)


def lipschitz_constant(r: float, R: float) -> float:
    return 13.0 * R * R / r ** 3


@dataclass(frozen=True)
class ComparisonReport:
    d_B: float | None
    d_F: float | None
    lipschitz_C: float | None
    bound_satisfied: bool | None
    r: float
    R: float
    per_k: np.ndarray | None = None
    note: str = ""


def compare(a: lat.PeriodicSet, q: lat.PeriodicSet, cfg: FingerprintConfig | None = None, metric: str = "both") -> ComparisonReport:
    """Fingerprint and/or bottleneck distance with the Lipschitz check in 3D."""
    if metric not in ("fingerprint", "bottleneck", "both"):
        raise ValueError(f"unknown metric {metric!r}")
    cfg = cfg or FingerprintConfig()
    r = min(lat.packing_radius(a), lat.packing_radius(q))
    R = max(lat.covering_radius(a), lat.covering_radius(q))
    d_b = bottleneck_distance(a, q) if metric in ("bottleneck", "both") else None
    d_f = per_k = None
    if metric in ("fingerprint", "both"):
        if a.dim != q.dim:
            raise ValueError("sets live in different dimensions")
        fa = psi_table(a, cfg, tgrid=np.linspace(0.0, _shared_tmax(a, q, cfg), cfg.t_steps))
        fq = psi_table(q, cfg, tgrid=fa.tgrid)
        d_f, per_k = fingerprint_distance(fa, fq, per_k=True)
    c = lipschitz_constant(r, R) if a.dim == 3 else None
    ok = None
    note = ""
    if d_b is not None and d_f is not None:
        if c is None:
            note = "constant not paper-backed in d!=3"
        elif d_b < r:
            ok = d_f <= c * d_b + BOUND_SLACK
        else:
            note = "bottleneck distance not below the packing radius; bound not applicable"
    return ComparisonReport(d_b, d_f, c, ok, r, R, per_k, note)


def _shared_tmax(a, q, cfg: FingerprintConfig) -> float:
    if cfg.t_max is not None:
        return float(cfg.t_max)
    R = max(lat.covering_radius(a), lat.covering_radius(q))
    return R * ((cfg.kmax + 1) ** (1.0 / a.dim) + 1.0)


@dataclass(frozen=True)
class TrialRow:
    trial: int
    d_B: float
    d_F: float
    ratio: float
    bound: float | None
    satisfied: bool | None


@dataclass(frozen=True)
class StabilityReport:
    delta: float
    rows: list[TrialRow] = field(default_factory=list)
    lipschitz_C: float | None = None
    note: str = ""

    @property
    def max_ratio(self) -> float:
        return max((row.ratio for row in self.rows), default=0.0)

    @property
    def all_satisfied(self) -> bool | None:
        if self.lipschitz_C is None:
            return None
        return all(row.satisfied for row in self.rows)


def stability_trial(pset: lat.PeriodicSet, delta: float, trials: int, cfg: FingerprintConfig | None = None, seed: int = 0) -> StabilityReport:
    """Perturb ``pset`` repeatedly and test ``d_F <= 13 R^2 / r^3 * d_B`` in each trial.

    ``r`` and ``R`` are the smaller packing and larger covering radius of the
    pair, so both sets satisfy the hypotheses. Outside 3D only ratios are reported.
    """
    cfg = cfg or FingerprintConfig()
    r0 = lat.packing_radius(pset)
    if delta >= r0 / 2:
        raise DeltaTooLarge(f"delta {delta:.6g} must be below half the packing radius {r0 / 2:.6g}")
    three_d = pset.dim == 3
    R0 = lat.covering_radius(pset)
    # moving points by at most delta raises the covering radius by at most delta,
    # so one grid reaches the vanishing radius of every trial
    tmax = cfg.t_max if cfg.t_max is not None else (R0 + delta) * ((cfg.kmax + 1) ** (1.0 / pset.dim) + 1.0)
    tgrid = np.linspace(0.0, tmax, cfg.t_steps)
    base_table = psi_table(pset, cfg, tgrid=tgrid)
    rows = []
    c_report = None
    for trial in range(trials):
        q = perturb(pset, delta, np.random.SeedSequence([seed, trial]))
        r = min(r0, lat.packing_radius(q))
        R = max(R0, lat.covering_radius(q))
        d_b = bottleneck_distance(pset, q)
        d_f = fingerprint_distance(base_table, psi_table(q, cfg, tgrid=tgrid))
        ratio = d_f / d_b if d_b > 0 else 0.0
        c = lipschitz_constant(r, R) if three_d else None
        if c is not None:
            c_report = c if c_report is None else max(c_report, c)
        ok = (d_f <= c * d_b + BOUND_SLACK) if c is not None else None
        rows.append(TrialRow(trial, d_b, d_f, ratio, c * d_b if c is not None else None, ok))
    note = "" if three_d else "constant not paper-backed in d!=3"
    return StabilityReport(delta, rows, c_report if three_d else None, note)


__all__ = [
    "ComparisonReport",
    "StabilityReport",
    "TrialRow",
    "common_lattice_check",
    "same_lattice",
    "torus_costs",
    "bottleneck_from_costs",
    "bottleneck_distance",
    "perturb",
    "lipschitz_constant",
    "compare",
    "stability_trial",
]
