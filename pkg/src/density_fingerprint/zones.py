"""Brillouin zones of motif points as depth-tagged cells of a bisector arrangement."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import lattice as lat
from .errors import DegenerateArrangement
from .polytope import Interval, Polygon, Polyhedron, halfspaces_of, make_box, thickness

GEOM_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class ConvexCell:
    """One cell of the arrangement: ``{x : normals @ x <= offsets}``.

    ``labels`` names the bisector behind each halfspace (an index into the
    owning complex's neighbour list) or a negative number for the clip box.
    ``depth`` counts the bisectors separating the cell from the zone centre.
    """

    normals: np.ndarray
    offsets: np.ndarray
    labels: tuple[int, ...]
    vertices: np.ndarray
    depth: int
    geometry: Interval | Polygon | Polyhedron

    @property
    def halfspaces(self) -> list[tuple[np.ndarray, float]]:
        return [(n, float(c)) for n, c in zip(self.normals, self.offsets)]

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    def volume(self) -> float:
        return self.geometry.volume()

    def contains(self, x, tol: float = 0.0) -> bool:
        x = np.asarray(x, float)
        return bool(np.all(self.normals @ x - self.offsets <= tol))


def _as_cell(geom, depth: int) -> ConvexCell:
    normals, offsets, labels = halfspaces_of(geom)
    return ConvexCell(normals, offsets, tuple(int(v) for v in labels), np.asarray(geom.vertices, float), depth, geom)


@dataclass(frozen=True, eq=False)
class ZoneComplex:
    """Belts 1..kmax of the bisector arrangement around one motif point.

    Belt ``k`` (cells of depth ``k-1``) is the k-th Brillouin zone of the
    centre; all cells are clipped to an axis box of half-width ``clip_halfwidth``.
    """

    motif_index: int
    center: np.ndarray
    kmax: int
    cells: tuple[ConvexCell, ...]
    cutoff: float
    clip_halfwidth: float
    neighbors: np.ndarray

    def belt(self, k: int) -> list[ConvexCell]:
        if not 1 <= k <= self.kmax:
            raise ValueError(f"belt index must be in 1..{self.kmax}")
        return [c for c in self.cells if c.depth == k - 1]

    def extent(self, k: int) -> float:
        """Largest distance from the centre to a vertex of belt ``k``."""
        cells = self.belt(k)
        return max(float(np.max(np.linalg.norm(c.vertices - self.center, axis=1))) for c in cells)


def zone_volume(zc: ZoneComplex, k: int) -> float:
    """Volume of the k-th Brillouin zone of the complex's centre."""
    return float(sum(c.volume() for c in zc.belt(k)))


# -- multiplicities ---------------------------------------------------------------

@dataclass(frozen=True)
class MultiplicityEntry:
    motif_index: int
    multiplicity: int
    shifts: tuple[tuple[int, ...], ...]
    representative: tuple[int, ...]

    @property
    def is_boundary(self) -> bool:
        return self.multiplicity >= 2

    def weights(self) -> list[float]:
        """Weight ``1/m`` of every translate lying in the origin's lattice Voronoi domain."""
        return [1.0 / self.multiplicity] * len(self.shifts)


@dataclass(frozen=True)
class MultiplicityTable:
    entries: tuple[MultiplicityEntry, ...]
    tol: float

    def __getitem__(self, i: int) -> MultiplicityEntry:
        return self.entries[i]

    def __len__(self) -> int:
        return len(self.entries)


def multiplicity(pset: lat.PeriodicSet, tol: float | None = None) -> MultiplicityTable:
    """Number of lattice Voronoi domains containing each motif point.

    A lattice point ``q`` counts when ``|p - q| <= min_q' |p - q'| + tol``. Each
    such ``q`` yields a translate ``p - q`` inside the Voronoi domain of the
    origin; the representative is the translate with lexicographically
    smallest fractional coordinates.
    """
    if tol is None:
        tol = 1e-7 * lat.covering_radius(pset)
    lattice_only = lat.PeriodicSet(pset.lattice, np.zeros((1, pset.dim)))
    entries = []
    for i, (p, f) in enumerate(zip(pset.positions, pset.motif)):
        near = lat.nearest_neighbors(lattice_only, p, 1)[0][1]
        batch = lat.periodic_points(lattice_only, p, near + tol)
        shifts = [tuple(int(v) for v in n) for n in batch.coeffs]
        fracs = [tuple(np.round(f - np.array(s), 12)) for s in shifts]
        rep = shifts[min(range(len(shifts)), key=lambda j: fracs[j])]
        entries.append(MultiplicityEntry(i, len(shifts), tuple(shifts), rep))
    return MultiplicityTable(tuple(entries), float(tol))


# -- arrangement ------------------------------------------------------------------

def cutoff_radius(pset: lat.PeriodicSet, kmax: int, R: float | None = None) -> float:
    """A priori neighbour radius ``4 R (kmax+1)^(1/d)`` that captures every relevant bisector."""
    if kmax < 1:
        raise ValueError("kmax must be at least 1")
    if R is None:
        R = lat.covering_radius(pset)
    if R <= 0:
        raise ValueError("covering radius must be positive")
    return 4.0 * R * (kmax + 1) ** (1.0 / pset.dim)


class _Arrangement:
    """Bisector halfspaces of one centre against a fixed neighbour list."""

    def __init__(self, center: np.ndarray, neighbors: np.ndarray, halfwidth: float):
        self.center = center
        self.neighbors = neighbors
        diff = neighbors - center
        dist = np.linalg.norm(diff, axis=1)
        self.normals = diff / dist[:, None]
        self.offsets = np.einsum("ij,ij->i", self.normals, 0.5 * (neighbors + center))
        self.halfwidth = halfwidth
        self.eps = GEOM_RTOL * halfwidth
        d = len(center)
        self.min_width = 10.0 * self.eps
        self.min_facet = 10.0 * self.eps * (2 * halfwidth) ** max(d - 2, 0) if d > 1 else 0.0

    def refine(self, geom, flips: frozenset[int]):
        """Clip ``geom`` by every violated bisector (with signs flipped for ``flips``)."""
        sign = np.ones(len(self.offsets))
        if flips:
            sign[list(flips)] = -1.0
        nrm = self.normals * sign[:, None]
        off = self.offsets * sign
        for _ in range(10_000):
            vals = geom.vertices @ nrm.T - off
            worst = vals.max(axis=0)
            viol = np.nonzero(worst > self.eps)[0]
            if viol.size == 0:
                return geom
            for j in viol[np.argsort(-worst[viol], kind="stable")]:
                geom = geom.clip(nrm[j], off[j], int(j), self.eps)
                if geom is None:
                    return None
        raise DegenerateArrangement("cell refinement did not converge")

    def cells(self, depth_max: int) -> list[tuple[object, int]]:
        """Breadth-first enumeration of cells with depth <= depth_max."""
        box = make_box(self.center, self.halfwidth)
        root = self.refine(box, frozenset())
        if root is None:
            raise DegenerateArrangement("empty Voronoi cell")
        seen: dict[frozenset[int], object] = {frozenset(): root}
        out = [(root, 0)]
        queue = deque([(frozenset(), root)])
        while queue:
            flips, geom = queue.popleft()
            depth = len(flips)
            if depth >= depth_max:
                continue
            facets = geom.facets(self.min_facet)
            for label, _, _, _ in facets:
                if label < 0 or label in flips:
                    continue
                child_flips = flips | {label}
                if child_flips in seen:
                    continue
                start = make_box(self.center, self.halfwidth)
                start = start.clip(-self.normals[label], -self.offsets[label], label, self.eps)
                for other, n, c, _ in facets:
                    if start is None:
                        break
                    if other >= 0 and other != label:
                        start = start.clip(n, c, other, self.eps)
                child = None if start is None else self.refine(start, child_flips)
                if child is not None and thickness(child) <= self.min_width:
                    child = None
                seen[child_flips] = child
                if child is not None:
                    out.append((child, depth + 1))
                    queue.append((child_flips, child))
        return out


def _initial_cutoff(pset: lat.PeriodicSet, kmax: int) -> float:
    # a point whose k-th nearest set point is the centre lies within d_k(x) of it
    return 2.0 * lat.kth_covering_bound(pset, kmax) * (1 + 1e-9)


def build_zones(
    pset: lat.PeriodicSet,
    motif_index: int,
    kmax: int,
    cutoff: float | Literal["auto", "safe"] = "auto",
) -> ZoneComplex:
    """Belts 1..kmax (the first kmax Brillouin zones) of one motif point.

    With ``cutoff="auto"`` the neighbour radius starts from a heuristic and is
    enlarged until every vertex of the belts lies within half the radius of
    the centre; by star-convexity of the Dirichlet-Voronoi domains this
    certifies that no bisector beyond the radius can touch them. ``"safe"``
    uses the a priori bound from :func:`cutoff_radius`.
    """
    if kmax < 1:
        raise ValueError("kmax must be at least 1")
    center = pset.positions[motif_index]
    s_max = cutoff_radius(pset, kmax)
    if cutoff == "safe":
        s, adaptive = s_max, False
    elif cutoff == "auto":
        s, adaptive = min(_initial_cutoff(pset, kmax), s_max), True
    else:
        s, adaptive = float(cutoff), False

    while True:
        batch = lat.periodic_points(pset, center, s)
        self_hit = (batch.motif_index == motif_index) & np.all(batch.coeffs == 0, axis=1)
        neighbors = batch.positions[~self_hit]
        arr = _Arrangement(center, neighbors, s)
        raw = arr.cells(kmax - 1)
        reach = max(float(np.max(np.linalg.norm(g.vertices - center, axis=1))) for g, _ in raw)
        if not adaptive or reach <= s / 2 * (1 - 1e-9) or s >= s_max:
            break
        s = min(s_max, max(2.0 * reach * (1 + 1e-6), 1.5 * s))

    cells = [_as_cell(g, depth) for g, depth in raw]
    cells.sort(key=lambda c: (c.depth, tuple(np.round(c.vertices.mean(axis=0), 9))))
    for k in range(1, kmax + 1):
        if not any(c.depth == k - 1 for c in cells):
            raise DegenerateArrangement(f"belt {k} is empty")
    return ZoneComplex(motif_index, center, kmax, tuple(cells), s, s, neighbors)


def jittered(pset: lat.PeriodicSet, magnitude: float, seed: int = 0) -> lat.PeriodicSet:
    """Copy of the set with each motif point displaced by at most ``magnitude``."""
    rng = np.random.default_rng(seed)
    d = pset.dim
    step = rng.normal(size=(len(pset), d))
    step *= magnitude / np.linalg.norm(step, axis=1, keepdims=True)
    pts = pset.positions + step
    return lat.PeriodicSet(pset.lattice, pset.lattice.to_fractional(pts), pset.labels)


__all__ = [
    "ConvexCell",
    "ZoneComplex",
    "MultiplicityEntry",
    "MultiplicityTable",
    "multiplicity",
    "cutoff_radius",
    "build_zones",
    "zone_volume",
    "jittered",
]

