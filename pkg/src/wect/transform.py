"""Height filtrations, (weighted) Euler curves and their directional transforms."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .complex import WeightedComplex
from .errors import ContractError


@dataclass(frozen=True)
class DirectionScheme:
    """n equally spaced unit directions; direction k has angle 2*pi*k/n."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("direction count must be positive")

    @property
    def angles(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.n) / self.n

    @property
    def directions(self) -> np.ndarray:
        a = self.angles
        return np.column_stack([np.cos(a), np.sin(a)])


@dataclass(frozen=True)
class FiltrationGrid:
    m: int
    lo: float = -1.0
    hi: float = 1.0

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("filtration grid needs at least 2 samples")
        if not self.lo < self.hi:
            raise ValueError(f"grid interval must satisfy lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def values(self) -> np.ndarray:
        return self.lo + (self.hi - self.lo) * np.arange(self.m) / (self.m - 1)

    @property
    def step(self) -> float:
        return (self.hi - self.lo) / (self.m - 1)


@dataclass(frozen=True)
class SmoothingSpec:
    """Gaussian kernel truncated at +-window samples with std ``sigma`` samples."""

    window: int
    sigma: Optional[float] = None

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("smoothing window must be >= 1")
        if self.sigma is None:
            object.__setattr__(self, "sigma", self.window / 3.0)
        if not self.sigma > 0:
            raise ValueError("smoothing sigma must be positive")

    def kernel(self) -> np.ndarray:
        t = np.arange(-self.window, self.window + 1, dtype=float)
        k = np.exp(-0.5 * (t / self.sigma) ** 2)
        return k / k.sum()


@dataclass(frozen=True, eq=False)
class Wect:
    matrix: np.ndarray  # (m, n): row j = filtration value, column k = direction
    scheme: DirectionScheme
    grid: FiltrationGrid
    smoothing: Optional[SmoothingSpec] = None

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=float, copy=True)
        if mat.shape != (self.grid.m, self.scheme.n):
            raise ValueError(f"matrix shape {mat.shape} != (m, n) = {(self.grid.m, self.scheme.n)}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def smoothed(self) -> bool:
        return self.smoothing is not None

    def compatible_with(self, other: "Wect") -> bool:
        return self.scheme == other.scheme and self.grid == other.grid and self.smoothing == other.smoothing

    def cell_area(self) -> float:
        """Area element of one matrix cell on the circle x interval."""
        return self.grid.step * 2 * np.pi / self.scheme.n

    def vectorize(self) -> np.ndarray:
        """Row-major flattening scaled so Euclidean distance matches the L2 distance."""
        return self.matrix.ravel() * np.sqrt(self.cell_area())

    def to_dict(self) -> dict:
        return {
            "n": self.scheme.n,
            "m": self.grid.m,
            "lo": self.grid.lo,
            "hi": self.grid.hi,
            "smoothed": self.smoothed,
            "window": self.smoothing.window if self.smoothing else 0,
            "sigma": self.smoothing.sigma if self.smoothing else 0.0,
            "matrix": self.matrix.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def to_csv(self) -> str:
        return "".join(",".join(repr(float(v)) for v in row) + "\n" for row in self.matrix)

    @classmethod
    def from_dict(cls, d: dict) -> "Wect":
        try:
            smoothing = SmoothingSpec(int(d["window"]), float(d["sigma"])) if d["smoothed"] else None
            return cls(np.asarray(d["matrix"], dtype=float).reshape(int(d["m"]), int(d["n"])),
                       DirectionScheme(int(d["n"])), FiltrationGrid(int(d["m"]), float(d["lo"]), float(d["hi"])),
                       smoothing)
        except KeyError as exc:
            raise ValueError(f"WECT JSON missing key {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "Wect":
        return cls.from_dict(json.loads(text))


def _check_unit(v) -> Tuple[float, float]:
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.shape != (2,) or abs(np.hypot(v[0], v[1]) - 1.0) > 1e-9:
        raise ValueError(f"direction must be a unit vector in the plane, got {v.tolist()}")
    return float(v[0]), float(v[1])


def _heights(K: WeightedComplex, vx, vy):
    """Filtration values of vertices, edges, triangles. vx/vy may be arrays of
    shape (n,) to evaluate several directions at once (last axis)."""
    x = K.positions[:, 0:1]
    y = K.positions[:, 1:2]
    hv = x * np.atleast_1d(vx) + y * np.atleast_1d(vy)  # (V, n)
    he = hv[K.edges].max(axis=1) if K.n_edges else np.zeros((0, hv.shape[1]))
    ht = hv[K.triangles].max(axis=1) if K.n_triangles else np.zeros((0, hv.shape[1]))
    return hv, he, ht


def height_filtration(K: WeightedComplex, v):
    """Projection heights along unit direction ``v``.

    Returns three arrays (vertices, edges, triangles); a simplex takes the
    largest height among its vertices.
    """
    vx, vy = _check_unit(v)
    hv, he, ht = _heights(K, vx, vy)
    return hv[:, 0], he[:, 0], ht[:, 0]


def _sweep(heights: np.ndarray, contrib: np.ndarray, grid_values: np.ndarray) -> np.ndarray:
    """Sublevel sums of ``contrib`` at each grid value, one column per direction.

    Each simplex is dropped into the first grid bin j with r_j >= height by
    binary search; bins are summed in simplex order and then accumulated.
    Summation order therefore depends only on bin membership, not on the
    exact heights, which keeps rotated copies bit-identical up to a shift.
    """
    S, n = heights.shape
    m = len(grid_values)
    out = np.zeros((m, n))
    if S == 0:
        return out
    bins = np.searchsorted(grid_values, heights, side="left")  # m means "above the grid"
    for k in range(n):
        per_bin = np.bincount(bins[:, k], weights=contrib[:, k], minlength=m + 1)
        out[:, k] = np.cumsum(per_bin[:m])
    return out


def _curves(K: WeightedComplex, vx, vy, grid: FiltrationGrid, weighted: bool = True) -> np.ndarray:
    hv, he, ht = _heights(K, vx, vy)
    heights = np.concatenate([hv, he, ht], axis=0)
    if weighted:
        contrib = np.concatenate([K.vw, -K.ew, K.tw])
    else:
        contrib = np.concatenate([np.ones(K.n_vertices), -np.ones(K.n_edges), np.ones(K.n_triangles)])
    contrib = np.broadcast_to(contrib[:, None], heights.shape)
    return _sweep(heights, contrib, grid.values)


def weighted_euler_curve(K: WeightedComplex, v, grid: FiltrationGrid) -> np.ndarray:
    vx, vy = _check_unit(v)
    return _curves(K, vx, vy, grid)[:, 0]


def euler_curve(K: WeightedComplex, v, grid: FiltrationGrid) -> np.ndarray:
    vx, vy = _check_unit(v)
    return _curves(K, vx, vy, grid, weighted=False)[:, 0].astype(np.int64)


def compute_wect(K: WeightedComplex, scheme: DirectionScheme, grid: FiltrationGrid) -> Wect:
    d = scheme.directions
    return Wect(_curves(K, d[:, 0], d[:, 1], grid), scheme, grid)


def compute_ect(K: WeightedComplex, scheme: DirectionScheme, grid: FiltrationGrid) -> Wect:
    d = scheme.directions
    return Wect(_curves(K, d[:, 0], d[:, 1], grid, weighted=False), scheme, grid)


def smooth(w: Wect, spec: SmoothingSpec) -> Wect:
    """Convolve every Euler curve with a truncated Gaussian, replicating edge values."""
    if w.smoothed:
        raise ContractError("WECT is already smoothed")
    kern = spec.kernel()
    pad = spec.window
    padded = np.pad(w.matrix, ((pad, pad), (0, 0)), mode="edge")
    m = w.grid.m
    out = np.zeros_like(w.matrix)
    for t, c in enumerate(kern):
        out += c * padded[t:t + m]
    return Wect(out, w.scheme, w.grid, spec)
