"""Embedded weighted simplicial complexes in the plane.

A complex is stored as flat numpy arrays: vertex positions, edges and
triangles as rows of vertex ids, and one weight array per dimension.
Arrays are made read-only on construction; operations return new complexes.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .errors import ContractError


def _frozen(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class WeightedComplex:
    positions: np.ndarray  # (V, 2) float
    edges: np.ndarray  # (E, 2) int, rows strictly increasing
    triangles: np.ndarray  # (T, 3) int, rows strictly increasing
    vw: np.ndarray
    ew: np.ndarray
    tw: np.ndarray

    def __init__(self, positions, edges=(), triangles=(), vw=None, ew=None, tw=None):
        pos = np.asarray(positions, dtype=float).reshape(-1, 2)
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        t = np.asarray(triangles, dtype=np.int64).reshape(-1, 3)
        vw = np.ones(len(pos)) if vw is None else np.asarray(vw, dtype=float).reshape(-1)
        ew = np.ones(len(e)) if ew is None else np.asarray(ew, dtype=float).reshape(-1)
        tw = np.ones(len(t)) if tw is None else np.asarray(tw, dtype=float).reshape(-1)
        for name, val in zip(("positions", "edges", "triangles", "vw", "ew", "tw"), (pos, e, t, vw, ew, tw)):
            object.__setattr__(self, name, _frozen(val))

    @classmethod
    def empty(cls) -> "WeightedComplex":
        return cls(np.zeros((0, 2)))

    @property
    def n_vertices(self) -> int:
        return len(self.positions)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def n_simplices(self) -> int:
        return self.n_vertices + self.n_edges + self.n_triangles

    def is_empty(self) -> bool:
        return self.n_vertices == 0

    def max_weight(self) -> float:
        ws = [w.max() for w in (self.vw, self.ew, self.tw) if len(w)]
        return float(max(ws)) if ws else 0.0

    def with_weights(self, vw, ew, tw) -> "WeightedComplex":
        return WeightedComplex(self.positions, self.edges, self.triangles, vw, ew, tw)

    def with_positions(self, positions) -> "WeightedComplex":
        return WeightedComplex(positions, self.edges, self.triangles, self.vw, self.ew, self.tw)

    def unit_weights(self) -> "WeightedComplex":
        return self.with_weights(np.ones(self.n_vertices), np.ones(self.n_edges), np.ones(self.n_triangles))

    def same_as(self, other: "WeightedComplex", atol: float = 0.0) -> bool:
        """Structural equality; positions and weights compared within ``atol``."""
        if not (np.array_equal(self.edges, other.edges) and np.array_equal(self.triangles, other.triangles)):
            return False
        pairs = zip((self.positions, self.vw, self.ew, self.tw), (other.positions, other.vw, other.ew, other.tw))
        return all(a.shape == b.shape and np.allclose(a, b, rtol=0, atol=atol) for a, b in pairs)

    # -- serialization ---------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "vertices": self.positions.tolist(),
            "edges": self.edges.tolist(),
            "triangles": self.triangles.tolist(),
            "vw": self.vw.tolist(),
            "ew": self.ew.tolist(),
            "tw": self.tw.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "WeightedComplex":
        try:
            return cls(d["vertices"], d["edges"], d["triangles"], d["vw"], d["ew"], d["tw"])
        except KeyError as exc:
            raise ValueError(f"complex JSON missing key {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "WeightedComplex":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class NormalizationRecord:
    centroid: Tuple[float, float]
    scale: float
    weight_max: float


def image_to_weighted_complex(image, mask=None) -> WeightedComplex:
    """Triangulate the nonzero (and unmasked) pixels of a grayscale image.

    Each selected pixel becomes a center vertex plus four corner vertices
    fanned into four triangles weighted by the pixel value. Pixel (row i,
    col j) is centered at (x, y) = (j, -i). Corners and edges shared by
    neighbouring pixels are merged, and lower simplices take the largest
    weight of any triangle containing them.
    """
    try:
        img = np.asarray(image)
    except ValueError as exc:  # ragged nested lists
        raise ValueError(f"image must be a rectangular grid: {exc}") from None
    if img.dtype == object or img.ndim != 2:
        raise ValueError("image must be a rectangular 2D grid")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError("image must be at least 1x1")
    if np.any(img < 0):
        raise ValueError("image values must be nonnegative")
    selected = img != 0
    if mask is not None:
        mask = np.asarray(mask)
        if mask.shape != img.shape:
            raise ValueError(f"mask shape {mask.shape} does not match image shape {img.shape}")
        selected &= mask == 1
    rows, cols = np.nonzero(selected)
    if len(rows) == 0:
        return WeightedComplex.empty()
    values = img[rows, cols].astype(float)

    # doubled lattice: center (2i, 2j), corners (2i +- 1, 2j +- 1)
    ci, cj = 2 * rows, 2 * cols
    # corners in cyclic order: top-left, top-right, bottom-right, bottom-left
    di = np.array([-1, -1, 1, 1])
    dj = np.array([-1, 1, 1, -1])
    ki = np.concatenate([ci[:, None], ci[:, None] + di], axis=1)  # (P, 5)
    kj = np.concatenate([cj[:, None], cj[:, None] + dj], axis=1)
    width = 2 * img.shape[1] + 3
    keys = (ki + 1) * width + (kj + 1)
    uniq, inv = np.unique(keys.ravel(), return_inverse=True)
    local = inv.reshape(-1, 5)
    ui, uj = np.divmod(uniq, width)
    positions = np.column_stack([(uj - 1) / 2.0, -(ui - 1) / 2.0])

    center = local[:, 0]
    corner = local[:, 1:]
    nxt = np.roll(corner, -1, axis=1)
    tris = np.stack([np.broadcast_to(center[:, None], corner.shape), corner, nxt], axis=2).reshape(-1, 3)
    tris = np.sort(tris, axis=1)
    tw = np.repeat(values, 4)

    spokes = np.stack([np.broadcast_to(center[:, None], corner.shape), corner], axis=2).reshape(-1, 2)
    rim = np.stack([corner, nxt], axis=2).reshape(-1, 2)
    all_edges = np.sort(np.concatenate([spokes, rim]), axis=1)
    edge_w = np.concatenate([np.repeat(values, 4), np.repeat(values, 4)])
    edges, einv = np.unique(all_edges, axis=0, return_inverse=True)
    einv = np.asarray(einv).reshape(-1)
    ew = np.zeros(len(edges))
    np.maximum.at(ew, einv, edge_w)

    vw = np.zeros(len(positions))
    np.maximum.at(vw, tris.ravel(), np.repeat(tw, 3))
    return WeightedComplex(positions, edges, tris, vw, ew, tw)


def euler_characteristic(K: WeightedComplex) -> int:
    return K.n_vertices - K.n_edges + K.n_triangles


def weighted_euler_characteristic(K: WeightedComplex) -> float:
    return float(K.vw.sum() - K.ew.sum() + K.tw.sum())


def _coface_max(K: WeightedComplex):
    """Largest weight over simplices strictly containing each vertex / edge.

    Entries are -inf where a simplex has no cofaces.
    """
    vmax = np.full(K.n_vertices, -np.inf)
    emax = np.full(K.n_edges, -np.inf)
    if K.n_edges:
        np.maximum.at(vmax, K.edges.ravel(), np.repeat(K.ew, 2))
    if K.n_triangles:
        np.maximum.at(vmax, K.triangles.ravel(), np.repeat(K.tw, 3))
        index = {tuple(e): k for k, e in enumerate(K.edges.tolist())}
        for tri, w in zip(K.triangles.tolist(), K.tw):
            a, b, c = tri
            for e in ((a, b), (a, c), (b, c)):
                k = index.get(e)
                if k is not None and w > emax[k]:
                    emax[k] = w
    return vmax, emax


def is_admissible(K: WeightedComplex) -> bool:
    """True iff each face carries the largest weight among its cofaces."""
    vmax, emax = _coface_max(K)
    vmask = np.isfinite(vmax)
    emask = np.isfinite(emax)
    return bool(np.array_equal(K.vw[vmask], vmax[vmask]) and np.array_equal(K.ew[emask], emax[emask]))


def _subcomplex(K: WeightedComplex, vkeep, ekeep, tkeep) -> WeightedComplex:
    remap = np.full(K.n_vertices, -1, dtype=np.int64)
    remap[vkeep] = np.arange(int(np.count_nonzero(vkeep)))
    return WeightedComplex(
        K.positions[vkeep],
        remap[K.edges[ekeep]],
        remap[K.triangles[tkeep]],
        K.vw[vkeep],
        K.ew[ekeep],
        K.tw[tkeep],
    )


def superlevel_subcomplex(K: WeightedComplex, z: float) -> WeightedComplex:
    """Simplices of weight >= z; a subcomplex whenever the weights are admissible."""
    if not is_admissible(K):
        raise ContractError("superlevel_subcomplex requires admissible weights")
    return _subcomplex(K, K.vw >= z, K.ew >= z, K.tw >= z)


def superlevel_sum_oracle(K: WeightedComplex) -> int:
    """Sum over z = 1..max weight of the Euler characteristic of {weight >= z}.

    Agrees with ``weighted_euler_characteristic`` on admissible integer weights.
    """
    weights = np.concatenate([K.vw, K.ew, K.tw])
    if np.any(weights != np.round(weights)) or np.any(weights < 1):
        raise ContractError("superlevel_sum_oracle requires positive integer weights")
    if not is_admissible(K):
        raise ContractError("superlevel_sum_oracle requires admissible weights")
    top = int(weights.max()) if len(weights) else 0
    return sum(euler_characteristic(superlevel_subcomplex(K, z)) for z in range(1, top + 1))


def normalize(K: WeightedComplex) -> Tuple[WeightedComplex, NormalizationRecord]:
    """Center at the vertex centroid, scale the farthest vertex to radius 1,
    and divide weights by the largest weight."""
    if K.is_empty():
        raise ContractError("cannot normalize an empty complex")
    centroid = K.positions.mean(axis=0)
    shifted = K.positions - centroid
    scale = float(np.sqrt((shifted**2).sum(axis=1)).max())
    if not scale > 0:
        raise ContractError("cannot normalize a complex whose vertices all coincide")
    wmax = K.max_weight()
    if not wmax > 0:
        raise ContractError("cannot normalize a complex with all-zero weights")
    out = WeightedComplex(shifted / scale, K.edges, K.triangles, K.vw / wmax, K.ew / wmax, K.tw / wmax)
    return out, NormalizationRecord((float(centroid[0]), float(centroid[1])), scale, wmax)


def rotation_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def rotate(K: WeightedComplex, theta: float) -> WeightedComplex:
    if theta == 0:
        return K
    c, s = np.cos(theta), np.sin(theta)
    x, y = K.positions[:, 0], K.positions[:, 1]
    return K.with_positions(np.column_stack([c * x - s * y, s * x + c * y]))


def validate(K: WeightedComplex) -> List[str]:
    """Return a list of human-readable problems; empty means valid."""
    problems = []
    V = K.n_vertices
    if not np.all(np.isfinite(K.positions)):
        problems.append("non-finite vertex position")
    for name, simp in (("edge", K.edges), ("triangle", K.triangles)):
        if len(simp) == 0:
            continue
        bad = np.any((simp < 0) | (simp >= V), axis=1)
        for k in np.nonzero(bad)[0]:
            problems.append(f"{name} {k} has out-of-range vertex id {simp[k].tolist()}")
        unsorted = np.any(np.diff(simp, axis=1) <= 0, axis=1)
        for k in np.nonzero(unsorted)[0]:
            problems.append(f"{name} {k} vertex ids not strictly increasing {simp[k].tolist()}")
        _, counts = np.unique(simp, axis=0, return_counts=True)
        n_dup = int((counts - 1).sum())
        if n_dup:
            problems.append(f"{n_dup} duplicate {name}(s)")
    edge_set = {tuple(e) for e in K.edges.tolist()}
    for k, (a, b, c) in enumerate(K.triangles.tolist()):
        for e in ((a, b), (a, c), (b, c)):
            if e not in edge_set:
                problems.append(f"triangle {k} missing face edge {list(e)}")
    for name, w, count in (("vertex", K.vw, V), ("edge", K.ew, K.n_edges), ("triangle", K.tw, K.n_triangles)):
        if len(w) != count:
            problems.append(f"{name} weights: expected {count}, got {len(w)}")
            continue
        for k in np.nonzero(~np.isfinite(w))[0]:
            problems.append(f"{name} {k} has non-finite weight")
        for k in np.nonzero(w < 0)[0]:
            problems.append(f"{name} {k} has negative weight {w[k]}")
    return problems


def load_complex(path) -> WeightedComplex:
    with open(path) as fh:
        return WeightedComplex.from_json(fh.read())


def save_complex(K: WeightedComplex, path, indent: Optional[int] = None) -> None:
    with open(path, "w") as fh:
        json.dump(K.to_dict(), fh, indent=indent)
