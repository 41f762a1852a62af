"""Lattices, periodic point sets, and neighbour enumeration."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import DuplicateMotifPoint, SingularBasis

DUP_RTOL = 1e-9


def _as_basis(basis) -> np.ndarray:
    b = np.array(basis, dtype=float)
    if b.ndim == 0:
        b = b.reshape(1, 1)
    elif b.ndim == 1 and b.size == 1:
        b = b.reshape(1, 1)
    return b


def _check_nonsingular(b: np.ndarray) -> None:
    if b.ndim != 2 or b.shape[0] != b.shape[1] or b.shape[0] not in (1, 2, 3):
        raise SingularBasis(f"basis must be a d x d matrix with d in 1..3, got shape {b.shape}")
    if not np.all(np.isfinite(b)):
        raise SingularBasis("basis has non-finite entries")
    norms = np.linalg.norm(b, axis=0)
    if np.any(norms == 0) or abs(np.linalg.det(b)) <= 1e-12 * np.prod(norms):
        raise SingularBasis("basis vectors are linearly dependent")


@dataclass(frozen=True, eq=False)
class Lattice:
    """Full-rank lattice; the columns of ``basis`` are the generating vectors."""

    basis: np.ndarray

    def __post_init__(self):
        b = _as_basis(self.basis)
        _check_nonsingular(b)
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @classmethod
    def from_rows(cls, rows) -> "Lattice":
        """Build from basis vectors given as rows."""
        return cls(_as_basis(rows).T)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def volume(self) -> float:
        return float(abs(np.linalg.det(self.basis)))

    @property
    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.basis)

    def to_cartesian(self, frac) -> np.ndarray:
        return np.asarray(frac, dtype=float) @ self.basis.T

    def to_fractional(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.inverse.T

    def __repr__(self) -> str:
        return f"Lattice(dim={self.dim}, rows={self.basis.T.tolist()})"


def square_lattice(dim: int = 2, a: float = 1.0) -> Lattice:
    return Lattice(a * np.eye(dim))


def hexagonal_lattice(a: float = 1.0) -> Lattice:
    return Lattice.from_rows([[a, 0.0], [a / 2, a * np.sqrt(3) / 2]])


# -- basis reduction ---------------------------------------------------------

def _reduce_columns(b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Pairwise (Lagrange/greedy) reduction. Returns (reduced, T) with reduced = b @ T."""
    d = b.shape[1]
    red = b.copy()
    T = np.eye(d, dtype=np.int64)
    if d == 1:
        if red[0, 0] < 0:
            red, T = -red, -T
        return red, T
    for _ in range(1000):
        changed = False
        for i, j in itertools.permutations(range(d), 2):
            vi, vj = red[:, i], red[:, j]
            q = int(np.rint(vi @ vj / (vi @ vi)))
            if q == 0:
                continue
            cand = vj - q * vi
            if cand @ cand < vj @ vj * (1 - 1e-12):
                red[:, j] = cand
                T[:, j] -= q * T[:, i]
                changed = True
        if not changed:
            break
    order = np.lexsort((np.arange(d), np.round(np.linalg.norm(red, axis=0), 12)))
    return red[:, order], T[:, order]


def reduce_basis(lattice: Lattice) -> Lattice:
    """Return a pairwise-reduced basis of the same lattice, shortest vectors first."""
    red, _ = _reduce_columns(lattice.basis)
    return Lattice(red)


# -- periodic sets -----------------------------------------------------------

def _wrap_unit(frac: np.ndarray) -> np.ndarray:
    f = np.mod(frac, 1.0)
    f[f >= 1.0] = 0.0
    return f


@dataclass(frozen=True, eq=False)
class PeriodicSet:
    """A periodic point set ``motif + lattice`` with the motif in fractional coordinates.

    Construction reduces the motif into ``[0, 1)`` and rejects coincident
    points, so every instance is canonical.
    """

    lattice: Lattice
    motif: np.ndarray
    labels: tuple[str, ...] | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.lattice, Lattice):
            object.__setattr__(self, "lattice", Lattice(self.lattice))
        d = self.lattice.dim
        m = np.array(self.motif, dtype=float)
        if m.ndim == 1:
            m = m.reshape(-1, d) if d > 1 else m.reshape(-1, 1)
        if m.ndim != 2 or m.shape[1] != d or m.shape[0] == 0:
            raise ValueError(f"motif must be a nonempty (n, {d}) array, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("motif has non-finite coordinates")
        m = _wrap_unit(m)
        _check_duplicates(self.lattice, m)
        m.setflags(write=False)
        object.__setattr__(self, "motif", m)
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != len(m):
                raise ValueError("labels must match motif length")
            object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.lattice.dim

    def __len__(self) -> int:
        return len(self.motif)

    @property
    def positions(self) -> np.ndarray:
        """Cartesian positions of the motif points."""
        return self.lattice.to_cartesian(self.motif)

    @property
    def intensity(self) -> float:
        return len(self.motif) / self.lattice.volume

    def _reduced(self) -> tuple[np.ndarray, np.ndarray]:
        if "reduced" not in self._cache:
            self._cache["reduced"] = _reduce_columns(self.lattice.basis)
        return self._cache["reduced"]

    def __repr__(self) -> str:
        return f"PeriodicSet({self.lattice!r}, motif={self.motif.tolist()})"


def _check_duplicates(lattice: Lattice, motif: np.ndarray) -> None:
    tau = DUP_RTOL * float(np.min(np.linalg.norm(lattice.basis, axis=0)))
    n = len(motif)
    for i in range(n):
        diff = motif[i + 1:] - motif[i]
        diff -= np.rint(diff)
        dist = np.linalg.norm(diff @ lattice.basis.T, axis=1)
        hit = np.nonzero(dist <= tau)[0]
        if hit.size:
            raise DuplicateMotifPoint(i, i + 1 + int(hit[0]), float(dist[hit[0]]))


def canonicalize(pset: PeriodicSet) -> PeriodicSet:
    """Reduce motif coordinates into [0, 1) and reject duplicates.

    Construction already does this; calling it again is harmless.
    """
    return PeriodicSet(pset.lattice, np.array(pset.motif), pset.labels)


def periodic_set(basis_rows, motif, labels=None) -> PeriodicSet:
    """Convenience constructor taking basis vectors as rows."""
    return PeriodicSet(Lattice.from_rows(basis_rows), np.asarray(motif, dtype=float), labels)


# -- enumeration ---------------------------------------------------------------

@dataclass(frozen=True)
class CloudPoint:
    motif_index: int
    cell_coeffs: tuple[int, ...]
    position: tuple[float, ...]


@dataclass(frozen=True)
class PointBatch:
    """Points of a periodic set as parallel arrays, sorted by distance to a centre."""

    positions: np.ndarray
    motif_index: np.ndarray
    coeffs: np.ndarray
    distances: np.ndarray

    def __len__(self) -> int:
        return len(self.distances)


def _sort_key_distances(dist: np.ndarray, scale: float) -> np.ndarray:
    # ties that differ only by round-off must sort by index
    return np.round(dist / scale, 10)


def periodic_points(pset: PeriodicSet, center, radius: float) -> PointBatch:
    """All points of the set inside the closed ball ``B(center, radius)`` as arrays."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    d = pset.dim
    c = np.asarray(center, dtype=float).reshape(d)
    red, T = pset._reduced()
    red_inv = np.linalg.inv(red)
    # per-axis coefficient bound: |n_j - y_j| <= radius * |row_j(B^-1)|
    row_norms = np.linalg.norm(red_inv, axis=1)
    motif_red = pset.motif @ np.linalg.inv(T).T
    y = red_inv @ c - motif_red  # (n_motif, d) targets in reduced coefficients
    slack = 1e-9
    lo = np.floor(y - radius * row_norms - slack).astype(np.int64)
    hi = np.ceil(y + radius * row_norms + slack).astype(np.int64)

    pos_list, idx_list, coeff_list = [], [], []
    for i in range(len(pset.motif)):
        axes = [np.arange(lo[i, j], hi[i, j] + 1) for j in range(d)]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
        pos = (grid + motif_red[i]) @ red.T
        dist = np.linalg.norm(pos - c, axis=1)
        keep = dist <= radius * (1 + 1e-12) + 1e-300
        if not np.any(keep):
            continue
        pos_list.append(pos[keep])
        idx_list.append(np.full(int(keep.sum()), i, dtype=np.int64))
        coeff_list.append(grid[keep] @ T.T)
    if not pos_list:
        return PointBatch(np.empty((0, d)), np.empty(0, np.int64), np.empty((0, d), np.int64), np.empty(0))
    pos = np.concatenate(pos_list)
    idx = np.concatenate(idx_list)
    coeffs = np.concatenate(coeff_list)
    # recompute positions from the original basis so coordinates do not depend on reduction
    pos = (pset.motif[idx] + coeffs) @ pset.lattice.basis.T
    dist = np.linalg.norm(pos - c, axis=1)
    scale = max(radius, float(np.min(np.linalg.norm(red, axis=0))))
    keys = [coeffs[:, j] for j in reversed(range(d))] + [idx, _sort_key_distances(dist, scale)]
    order = np.lexsort(keys)
    return PointBatch(pos[order], idx[order], coeffs[order], dist[order])


def enumerate_points(pset: PeriodicSet, center, radius: float) -> list[CloudPoint]:
    """Points of the periodic set in the closed ball, sorted by distance then index."""
    batch = periodic_points(pset, center, radius)
    return [
        CloudPoint(int(i), tuple(int(v) for v in n), tuple(float(v) for v in p))
        for p, i, n in zip(batch.positions, batch.motif_index, batch.coeffs)
    ]


def nearest_neighbors(pset: PeriodicSet, x, j: int) -> list[tuple[CloudPoint, float]]:
    """The ``j`` closest points of the set to ``x`` with their distances."""
    if j < 1:
        raise ValueError("j must be at least 1")
    red, _ = pset._reduced()
    radius = float(np.max(np.linalg.norm(red, axis=0)))
    while True:
        batch = periodic_points(pset, x, radius)
        if len(batch) >= j:
            break
        radius *= 2.0
    out = []
    for k in range(j):
        p = CloudPoint(
            int(batch.motif_index[k]),
            tuple(int(v) for v in batch.coeffs[k]),
            tuple(float(v) for v in batch.positions[k]),
        )
        out.append((p, float(batch.distances[k])))
    return out


# -- packing and covering radii ----------------------------------------------

@dataclass(frozen=True)
class RadiiReport:
    packing: float
    covering: float
    covering_tolerance: float


def packing_radius(pset: PeriodicSet) -> float:
    """Half the minimum distance between distinct points of the set."""
    if "packing" in pset._cache:
        return pset._cache["packing"]
    red, _ = pset._reduced()
    bound = float(np.min(np.linalg.norm(red, axis=0)))  # self-translate distance
    best = bound
    for i, p in enumerate(pset.positions):
        batch = periodic_points(pset, p, bound)
        self_hit = (batch.motif_index == i) & np.all(batch.coeffs == 0, axis=1)
        others = batch.distances[~self_hit]
        if others.size:
            best = min(best, float(others.min()))
    r = best / 2.0
    pset._cache["packing"] = r
    return r


def _cell_cloud(pset: PeriodicSet, extra: float) -> np.ndarray:
    """Points of the set within ``extra`` of the unit cell (by a bounding ball)."""
    b = pset.lattice.basis
    d = pset.dim
    corners = np.array(list(itertools.product((0.0, 1.0), repeat=d))) @ b.T
    centre = corners.mean(axis=0)
    circ = float(np.max(np.linalg.norm(corners - centre, axis=1)))
    return periodic_points(pset, centre, circ + extra).positions


def _cell_grid(pset: PeriodicSet, target: int) -> tuple[np.ndarray, np.ndarray]:
    """Box centres (fractional) of a grid over the unit cell with roughly cubic boxes."""
    d = pset.dim
    lengths = np.linalg.norm(pset.lattice.basis, axis=0)
    h = (np.prod(lengths) / target) ** (1.0 / d)
    m = np.maximum(1, np.ceil(lengths / h).astype(int))
    axes = [(np.arange(k) + 0.5) / k for k in m]
    centres = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    return centres, 0.5 / m


def _half_diagonal(pset: PeriodicSet, half: np.ndarray) -> float:
    d = pset.dim
    signs = np.array(list(itertools.product((-1.0, 1.0), repeat=d)))
    return float(np.max(np.linalg.norm((signs * half) @ pset.lattice.basis.T, axis=1)))


def kth_covering_bound(pset: PeriodicSet, k: int) -> float:
    """Upper bound on ``max_x d_k(x)``, the largest distance from a point of
    space to its k-th nearest point of the set.

    ``d_k`` is 1-Lipschitz, so its maximum over a grid plus the grid-box
    half-diagonal bounds it everywhere.
    """
    key = ("kcov", k)
    if key in pset._cache:
        return pset._cache[key]
    d = pset.dim
    centres, half = _cell_grid(pset, max(64, 64 * len(pset)) if d > 1 else 256)
    delta = _half_diagonal(pset, half)
    big_r = covering_radius(pset)
    reach = big_r * (k ** (1.0 / d) + 1.0) + delta
    tree = cKDTree(_cell_cloud(pset, reach))
    dist, _ = tree.query(centres @ pset.lattice.basis.T, k=k)
    dist = np.asarray(dist).reshape(len(centres), k)
    bound = float(dist[:, k - 1].max()) + delta
    pset._cache[key] = bound
    return bound


def covering_radius(pset: PeriodicSet, tol: float | None = None) -> float:
    """Largest distance from a point of space to the set.

    Branch-and-bound over boxes of the unit cell, using that the distance
    function is 1-Lipschitz. The returned value is a certified upper bound
    within ``tol`` of the true covering radius.
    """
    red, _ = pset._reduced()
    scale = float(np.min(np.linalg.norm(red, axis=0)))
    if tol is None:
        tol = 1e-6 * scale
    if tol <= 0:
        raise ValueError("tol must be positive")
    key = ("covering", float(tol))
    if key in pset._cache:
        return pset._cache[key]

    d = pset.dim
    b = pset.lattice.basis
    margin = 0.5 * float(np.sum(np.linalg.norm(red, axis=0)))
    tree = cKDTree(_cell_cloud(pset, margin + scale))
    signs = np.array(list(itertools.product((-1.0, 1.0), repeat=d)))

    centres, half = _cell_grid(pset, {1: 64, 2: 600, 3: 4000}[d])

    best = 0.0
    for _ in range(200):
        vals, _ = tree.query(centres @ b.T)
        best = max(best, float(vals.max()))
        delta = float(np.max(np.linalg.norm((signs * half) @ b.T, axis=1)))
        upper = vals + delta
        keep = upper >= best - 1e-12 * scale
        if delta <= tol / 2 or upper[keep].max() - best <= tol:
            result = min(float(upper[keep].max()), best + tol)
            break
        centres = centres[keep]
        half = half / 2
        centres = (centres[:, None, :] + signs[None, :, :] * half).reshape(-1, d)
    else:  # pragma: no cover
        result = best + tol
    pset._cache[key] = result
    return result


def radii(pset: PeriodicSet, tol: float | None = None) -> RadiiReport:
    red, _ = pset._reduced()
    if tol is None:
        tol = 1e-6 * float(np.min(np.linalg.norm(red, axis=0)))
    return RadiiReport(packing_radius(pset), covering_radius(pset, tol), tol)


def torus_distance(lattice: Lattice, x, y) -> float:
    """Distance between the lattice cosets of two Cartesian points."""
    red, _ = _reduce_columns(lattice.basis)
    diff = np.asarray(y, float) - np.asarray(x, float)
    frac = np.linalg.solve(red, diff)
    frac -= np.rint(frac)
    v = red @ frac
    radius = float(np.linalg.norm(v))
    row_norms = np.linalg.norm(np.linalg.inv(red), axis=1)
    d = lattice.dim
    span = [np.arange(-int(np.ceil(radius * rn + 1e-9)), int(np.ceil(radius * rn + 1e-9)) + 1) for rn in row_norms]
    grid = np.stack(np.meshgrid(*span, indexing="ij"), axis=-1).reshape(-1, d)
    return float(np.min(np.linalg.norm(v + grid @ red.T, axis=1)))


def isometric_copy(pset: PeriodicSet, rotation, translation=None) -> PeriodicSet:
    """Apply ``x -> rotation @ x + translation`` to a periodic set."""
    q = np.asarray(rotation, dtype=float)
    new_basis = q @ pset.lattice.basis
    pts = pset.positions @ q.T
    if translation is not None:
        pts = pts + np.asarray(translation, float)
    lat = Lattice(new_basis)
    return PeriodicSet(lat, lat.to_fractional(pts), pset.labels)


def supercell(pset: PeriodicSet, factors: Sequence[int]) -> PeriodicSet:
    """The same point set written over the sublattice spanned by scaled basis vectors."""
    f = np.asarray(factors, dtype=int)
    d = pset.dim
    new_basis = pset.lattice.basis * f[None, :]
    shifts = np.stack(np.meshgrid(*[np.arange(k) for k in f], indexing="ij"), axis=-1).reshape(-1, d)
    motif = ((pset.motif[:, None, :] + shifts[None, :, :]) / f).reshape(-1, d)
    labels = None
    if pset.labels is not None:
        labels = [lab for lab in pset.labels for _ in range(len(shifts))]
    return PeriodicSet(Lattice(new_basis), motif, labels)
