"""Bounded convex polytopes in dimensions 1-3, clipped one halfspace at a time.

Each facet carries an integer label (the index of the bisector that created
it, or a negative number for the bounding box) so cells of an arrangement
know which hyperplanes they can be crossed through.
"""

from __future__ import annotations

import numpy as np


class Interval:
    dim = 1

    def __init__(self, lo: float, hi: float, lo_label: int, hi_label: int):
        self.lo, self.hi = float(lo), float(hi)
        self.lo_label, self.hi_label = lo_label, hi_label

    @property
    def vertices(self) -> np.ndarray:
        return np.array([[self.lo], [self.hi]])

    def volume(self) -> float:
        return self.hi - self.lo

    def boundary_measure(self) -> float:
        return 2.0

    def clip(self, normal, offset: float, label: int, eps: float):
        n = float(normal[0])
        bound = offset / n
        if n > 0:
            if self.hi <= bound + eps:
                return self
            if bound <= self.lo + eps:
                return None
            return Interval(self.lo, bound, self.lo_label, label)
        if self.lo >= bound - eps:
            return self
        if bound >= self.hi - eps:
            return None
        return Interval(bound, self.hi, label, self.hi_label)

    def facets(self, min_measure: float):
        """(label, outward normal, offset, point on facet) for each facet."""
        return [
            (self.lo_label, np.array([-1.0]), -self.lo, np.array([self.lo])),
            (self.hi_label, np.array([1.0]), self.hi, np.array([self.hi])),
        ]


def _polygon_area(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


class Polygon:
    """Counter-clockwise convex polygon; ``labels[i]`` labels edge ``v[i] -> v[i+1]``."""

    dim = 2

    def __init__(self, vertices: np.ndarray, labels: list[int], normals: np.ndarray, offsets: np.ndarray):
        self.vertices = vertices
        self.labels = labels
        self.normals = normals
        self.offsets = offsets

    @classmethod
    def box(cls, lo, hi):
        (x0, y0), (x1, y1) = lo, hi
        v = np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]], dtype=float)
        normals = np.array([[0.0, -1.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])
        offsets = np.array([-y0, x1, y1, -x0])
        return cls(v, [-1, -2, -3, -4], normals, offsets)

    def volume(self) -> float:
        return _polygon_area(self.vertices)

    def boundary_measure(self) -> float:
        v = self.vertices
        return float(np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1).sum())

    def clip(self, normal, offset: float, label: int, eps: float):
        v = self.vertices
        vals = v @ normal - offset
        if np.all(vals <= eps):
            return self
        if np.all(vals >= -eps):
            return None
        n = len(v)
        pts, labs, nrm, off = [], [], [], []
        for i in range(n):
            j = (i + 1) % n
            vp, vq = vals[i], vals[j]
            if vp <= eps:
                pts.append(v[i])
                labs.append(self.labels[i])
                nrm.append(self.normals[i])
                off.append(self.offsets[i])
                if vq > eps:
                    if vp < -eps:
                        x = v[i] + (vp / (vp - vq)) * (v[j] - v[i])
                        pts.append(x)
                        labs.append(label)
                        nrm.append(normal)
                        off.append(offset)
                    else:  # leaves along the cutting line from this vertex
                        labs[-1] = label
                        nrm[-1] = normal
                        off[-1] = offset
            elif vq < -eps:
                x = v[i] + (vp / (vp - vq)) * (v[j] - v[i])
                pts.append(x)
                labs.append(self.labels[i])
                nrm.append(self.normals[i])
                off.append(self.offsets[i])
        pts = np.array(pts)
        # merge consecutive near-duplicates, keeping the outgoing edge of the later one
        m = len(pts)
        keep = [i for i in range(m) if np.linalg.norm(pts[(i + 1) % m] - pts[i]) > eps]
        if len(keep) < 3:
            return None
        out = Polygon(
            pts[keep],
            [labs[i] for i in keep],
            np.array([nrm[i] for i in keep]),
            np.array([off[i] for i in keep]),
        )
        if out.volume() <= eps * eps:
            return None
        return out

    def facets(self, min_measure: float):
        out = []
        v = self.vertices
        n = len(v)
        for i in range(n):
            a, b = v[i], v[(i + 1) % n]
            if np.linalg.norm(b - a) > min_measure:
                out.append((self.labels[i], self.normals[i], self.offsets[i], 0.5 * (a + b)))
        return out


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # np.cross carries heavy per-call overhead for the tiny arrays used here
    return np.stack(
        [
            a[..., 1] * b[..., 2] - a[..., 2] * b[..., 1],
            a[..., 2] * b[..., 0] - a[..., 0] * b[..., 2],
            a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0],
        ],
        axis=-1,
    )


def _plane_basis(n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal (u, w) with u x w = n."""
    a = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = _cross(n, a)
    u /= np.linalg.norm(u)
    w = _cross(n, u)
    return u, w


class Polyhedron:
    """Convex polyhedron as vertices plus faces.

    ``faces[f]`` is a vertex-index loop, counter-clockwise seen from outside;
    ``normals[f]``/``offsets[f]`` give the outward face plane ``n.x = c``.
    """

    dim = 3

    def __init__(self, vertices, faces, labels, normals, offsets):
        self.vertices = vertices
        self.faces = faces
        self.labels = labels
        self.normals = normals
        self.offsets = offsets

    @classmethod
    def box(cls, lo, hi):
        lo = np.asarray(lo, float)
        hi = np.asarray(hi, float)
        v = np.array([[hi[0] if i & 1 else lo[0], hi[1] if i & 2 else lo[1], hi[2] if i & 4 else lo[2]] for i in range(8)])
        faces = [
            [0, 2, 6, 4],  # x = lo
            [1, 5, 7, 3],  # x = hi
            [0, 4, 5, 1],  # y = lo
            [2, 3, 7, 6],  # y = hi
            [0, 1, 3, 2],  # z = lo
            [4, 6, 7, 5],  # z = hi
        ]
        normals = np.array([[-1, 0, 0], [1, 0, 0], [0, -1, 0], [0, 1, 0], [0, 0, -1], [0, 0, 1]], dtype=float)
        offsets = np.array([-lo[0], hi[0], -lo[1], hi[1], -lo[2], hi[2]])
        poly = cls(v, faces, [-1, -2, -3, -4, -5, -6], normals, offsets)
        for f, area in enumerate(poly.face_areas()):
            if area < 0:
                faces[f] = faces[f][::-1]
        return poly

    def face_areas(self) -> np.ndarray:
        """Signed areas (positive for loops counter-clockwise about the outward normal)."""
        v = self.vertices - self.vertices.mean(axis=0)
        starts = np.cumsum([0] + [len(loop) for loop in self.faces[:-1]])
        head = np.concatenate(self.faces)
        tail = np.concatenate([list(loop[1:]) + [loop[0]] for loop in self.faces])
        cr = np.add.reduceat(_cross(v[head], v[tail]), starts, axis=0)
        return 0.5 * np.einsum("ij,ij->i", cr, np.asarray(self.normals, float))

    def volume(self) -> float:
        ref = self.vertices.mean(axis=0)
        h = self.offsets - self.normals @ ref
        return float(np.dot(h, self.face_areas()) / 3.0)

    def boundary_measure(self) -> float:
        return float(self.face_areas().sum())

    def clip(self, normal, offset: float, label: int, eps: float):
        v = self.vertices
        vals = v @ normal - offset
        if np.all(vals <= eps):
            return self
        if np.all(vals >= -eps):
            return None
        inside = vals <= eps
        new_index = -np.ones(len(v), dtype=np.int64)
        new_index[inside] = np.arange(int(inside.sum()))
        pts = list(v[inside])
        cap = [int(new_index[i]) for i in np.nonzero(np.abs(vals) <= eps)[0]]
        edge_pts: dict[tuple[int, int], int] = {}

        def cut(i: int, j: int) -> int:
            key = (i, j) if i < j else (j, i)
            k = edge_pts.get(key)
            if k is None:
                a, b = v[key[0]], v[key[1]]
                va, vb = vals[key[0]], vals[key[1]]
                pts.append(a + (va / (va - vb)) * (b - a))
                k = len(pts) - 1
                edge_pts[key] = k
                cap.append(k)
            return k

        faces, labels, normals, offsets = [], [], [], []
        for f, loop in enumerate(self.faces):
            out = []
            m = len(loop)
            for t in range(m):
                i, j = loop[t], loop[(t + 1) % m]
                if inside[i]:
                    out.append(int(new_index[i]))
                if (vals[i] < -eps and vals[j] > eps) or (vals[i] > eps and vals[j] < -eps):
                    out.append(cut(i, j))
            if len(out) >= 3:
                faces.append(out)
                labels.append(self.labels[f])
                normals.append(self.normals[f])
                offsets.append(self.offsets[f])
        pts = np.array(pts)
        if len(cap) >= 3:
            cap = sorted(set(cap))
            cp = pts[cap]
            u, w = _plane_basis(normal)
            rel = cp - cp.mean(axis=0)
            ang = np.arctan2(rel @ w, rel @ u)
            order = [cap[i] for i in np.argsort(ang, kind="stable")]
            faces.append(order)
            labels.append(label)
            normals.append(np.asarray(normal, float))
            offsets.append(float(offset))
        return _cleanup(pts, faces, labels, normals, offsets, eps)

    def facets(self, min_measure: float):
        areas = self.face_areas()
        out = []
        for f, loop in enumerate(self.faces):
            if areas[f] > min_measure:
                out.append((self.labels[f], self.normals[f], self.offsets[f], self.vertices[loop].mean(axis=0)))
        return out


def _cleanup(pts, faces, labels, normals, offsets, eps):
    """Merge vertices closer than ``eps`` and drop faces that collapse."""
    n = len(pts)
    rep = np.arange(n)
    if n > 1:
        dist = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
        for i in range(n):
            if rep[i] != i:
                continue
            close = np.nonzero(dist[i, i + 1:] <= eps)[0] + i + 1
            for j in close:
                if rep[j] == j:
                    rep[j] = i
    used = sorted(set(rep.tolist()))
    remap = {old: k for k, old in enumerate(used)}
    new_pts = pts[used]
    out_f, out_l, out_n, out_o = [], [], [], []
    for loop, lab, nr, of in zip(faces, labels, normals, offsets):
        seq = []
        for i in loop:
            r = remap[int(rep[i])]
            if not seq or seq[-1] != r:
                seq.append(r)
        while len(seq) > 1 and seq[0] == seq[-1]:
            seq.pop()
        if len(set(seq)) >= 3:
            out_f.append(seq)
            out_l.append(lab)
            out_n.append(nr)
            out_o.append(of)
    if len(out_f) < 4:
        return None
    poly = Polyhedron(new_pts, out_f, out_l, np.array(out_n), np.array(out_o))
    if poly.volume() <= eps ** 3:
        return None
    return poly


def make_box(center, halfwidth: float):
    c = np.asarray(center, float)
    d = len(c)
    lo, hi = c - halfwidth, c + halfwidth
    if d == 1:
        return Interval(lo[0], hi[0], -1, -2)
    if d == 2:
        return Polygon.box(lo, hi)
    return Polyhedron.box(lo, hi)


def halfspaces_of(poly) -> tuple[np.ndarray, np.ndarray, list[int]]:
    """Facet-defining halfspaces ``n.x <= c`` with their labels."""
    if isinstance(poly, Interval):
        return (np.array([[-1.0], [1.0]]), np.array([-poly.lo, poly.hi]), [poly.lo_label, poly.hi_label])
    return np.asarray(poly.normals, float), np.asarray(poly.offsets, float), list(poly.labels)


def simplices(poly) -> tuple[np.ndarray, np.ndarray]:
    """Fan decomposition into simplices: (corner arrays (m, d+1, d), volumes (m,))."""
    if isinstance(poly, Interval):
        s = np.array([[[poly.lo], [poly.hi]]])
        return s, np.array([poly.hi - poly.lo])
    v = poly.vertices
    if isinstance(poly, Polygon):
        tris = np.array([[v[0], v[i], v[i + 1]] for i in range(1, len(v) - 1)])
        a = tris[:, 1] - tris[:, 0]
        b = tris[:, 2] - tris[:, 0]
        return tris, 0.5 * np.abs(a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0])
    apex = v.mean(axis=0)
    tets = []
    for loop in poly.faces:
        for i in range(1, len(loop) - 1):
            tets.append([apex, v[loop[0]], v[loop[i]], v[loop[i + 1]]])
    tets = np.array(tets)
    vols = np.abs(np.einsum("ij,ij->i", tets[:, 1] - tets[:, 0], _cross(tets[:, 2] - tets[:, 0], tets[:, 3] - tets[:, 0]))) / 6.0
    return tets, vols


__all__ = ["Interval", "Polygon", "Polyhedron", "make_box", "halfspaces_of", "simplices"]


def thickness(poly) -> float:
    """Inradius-like width ``d * volume / boundary measure`` (the length in 1D)."""
    if isinstance(poly, Interval):
        return poly.volume()
    return poly.dim * poly.volume() / poly.boundary_measure()
