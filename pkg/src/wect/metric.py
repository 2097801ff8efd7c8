"""L2 distances between WECTs and rotational registration by cyclic shifts."""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import IncompatibleWectError
from .transform import Wect


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    entries: np.ndarray
    registered: bool = False
    shifts: Optional[np.ndarray] = None

    @property
    def size(self) -> int:
        return len(self.entries)

    def to_csv(self) -> str:
        return "".join(",".join(f"{v:.17g}" for v in row) + "\n" for row in self.entries)

    @classmethod
    def from_csv(cls, text: str) -> "DistanceMatrix":
        rows = [line for line in text.splitlines() if line.strip()]
        try:
            entries = np.array([[float(v) for v in line.split(",")] for line in rows])
        except ValueError as exc:
            raise ValueError(f"malformed distance matrix CSV: {exc}") from None
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError(f"distance matrix CSV must be square, got shape {entries.shape}")
        return cls(entries)

    def to_dict(self) -> dict:
        d = {"size": self.size, "registered": self.registered, "entries": self.entries.tolist()}
        if self.shifts is not None:
            d["shifts"] = self.shifts.tolist()
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "DistanceMatrix":
        shifts = d.get("shifts")
        return cls(np.asarray(d["entries"], dtype=float), bool(d.get("registered", False)),
                   None if shifts is None else np.asarray(shifts, dtype=np.int64))


def _check(a: Wect, b: Wect) -> None:
    if not a.compatible_with(b):
        raise IncompatibleWectError(
            "WECTs differ in direction scheme, filtration grid or smoothing: "
            f"(n={a.scheme.n}, {a.grid}, {a.smoothing}) vs (n={b.scheme.n}, {b.grid}, {b.smoothing})"
        )


def wect_distance(a: Wect, b: Wect) -> float:
    """Riemann-sum L2 distance on circle x interval: Frobenius norm times sqrt(dr * dtheta)."""
    _check(a, b)
    return float(np.linalg.norm(a.matrix - b.matrix) * np.sqrt(a.cell_area()))


def shift_wect(a: Wect, k: int) -> Wect:
    """Column c of the result is column (c + k) mod n of ``a``."""
    return Wect(np.roll(a.matrix, -(k % a.scheme.n), axis=1), a.scheme, a.grid, a.smoothing)


def _registered(A: np.ndarray, B: np.ndarray, scale: float) -> Tuple[int, float]:
    n = A.shape[1]
    # dist[k] = || A - roll(B, -k) ||; smallest k wins ties
    dists = np.array([np.linalg.norm(A - np.roll(B, -k, axis=1)) for k in range(n)]) * scale
    k = int(np.argmin(dists))
    return k, float(dists[k])


def register_rotation(a: Wect, b: Wect) -> Tuple[int, float]:
    """Best cyclic shift k of ``b`` towards ``a``.

    Returns (k, d) minimising wect_distance(a, shift_wect(b, k)). If ``b`` is
    the WECT of ``a``'s complex rotated by 2*pi*k/n, the result is k.
    """
    _check(a, b)
    return _registered(a.matrix, b.matrix, np.sqrt(a.cell_area()))


def distance_matrix(ws: Sequence[Wect], register: bool = False, workers: int = 1) -> DistanceMatrix:
    """Pairwise (optionally rotation-registered) distances.

    Each unordered pair is computed once, independently of the others, so the
    result does not depend on ``workers``.
    """
    ws = list(ws)
    if not ws:
        raise ValueError("distance_matrix needs at least one WECT")
    for w in ws[1:]:
        _check(ws[0], w)
    N = len(ws)
    n = ws[0].scheme.n
    scale = np.sqrt(ws[0].cell_area())
    mats = [w.matrix for w in ws]
    pairs = [(i, j) for i in range(N) for j in range(i + 1, N)]

    def one(pair):
        i, j = pair
        if register:
            return _registered(mats[i], mats[j], scale)
        return 0, float(np.linalg.norm(mats[i] - mats[j]) * scale)

    if workers > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, pairs))
    else:
        results = [one(p) for p in pairs]

    D = np.zeros((N, N))
    S = np.zeros((N, N), dtype=np.int64) if register else None
    for (i, j), (k, d) in zip(pairs, results):
        D[i, j] = D[j, i] = d
        if register:
            S[i, j] = k
            S[j, i] = (n - k) % n
    return DistanceMatrix(D, register, S)
