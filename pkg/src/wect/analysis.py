"""Ward hierarchical clustering and linear multiclass SVMs with cross-validation."""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .metric import DistanceMatrix


# ---------------------------------------------------------------------------
# Ward clustering


@dataclass(frozen=True)
class Merge:
    a: int
    b: int
    height: float
    size: int


@dataclass(frozen=True)
class Dendrogram:
    """Merge history in the usual linkage convention: leaves are 0..N-1 and
    the cluster formed by merge t gets id N + t."""

    merges: Tuple[Merge, ...]
    n_leaves: int

    def heights(self) -> np.ndarray:
        return np.array([m.height for m in self.merges])

    def to_linkage(self) -> np.ndarray:
        return np.array([[m.a, m.b, m.height, m.size] for m in self.merges], dtype=float).reshape(-1, 4)

    def to_dict(self) -> dict:
        return {"n_leaves": self.n_leaves,
                "merges": [{"a": m.a, "b": m.b, "height": m.height, "size": m.size} for m in self.merges]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "Dendrogram":
        return cls(tuple(Merge(int(m["a"]), int(m["b"]), float(m["height"]), int(m["size"])) for m in d["merges"]),
                   int(d["n_leaves"]))


def ward_cluster(D) -> Dendrogram:
    """Agglomerative clustering with Ward linkage.

    Works on squared distances with the Lance-Williams update; a merge's
    height is the square root of the merged pair's updated value. Ties go
    to the lexicographically smallest pair of cluster ids.
    """
    entries = D.entries if isinstance(D, DistanceMatrix) else np.asarray(D, dtype=float)
    N = len(entries)
    if N < 2:
        raise ValueError("ward_cluster needs at least 2 items")
    if entries.shape != (N, N) or not np.allclose(entries, entries.T, rtol=0, atol=1e-12):
        raise ValueError("distance matrix must be square and symmetric")
    if np.any(entries < 0):
        raise ValueError("distances must be nonnegative")

    d2 = entries.astype(float) ** 2
    np.fill_diagonal(d2, np.inf)
    ids = np.arange(N)  # cluster id held in each slot
    sizes = np.ones(N)
    active = np.ones(N, dtype=bool)
    merges = []
    for t in range(N - 1):
        best = d2.min()
        ii, jj = np.nonzero(d2 == best)
        cand = np.column_stack([np.minimum(ids[ii], ids[jj]), np.maximum(ids[ii], ids[jj])])
        pick = np.lexsort((cand[:, 1], cand[:, 0]))[0]
        i, j = ii[pick], jj[pick]
        ni, nj = sizes[i], sizes[j]
        a, b = sorted((int(ids[i]), int(ids[j])))
        merges.append(Merge(a, b, float(np.sqrt(best)), int(ni + nj)))

        nk = sizes
        new = ((ni + nk) * d2[i] + (nj + nk) * d2[j] - nk * best) / (ni + nj + nk)
        active[j] = False
        new[~active] = np.inf
        new[i] = np.inf
        d2[i, :] = new
        d2[:, i] = new
        d2[j, :] = np.inf
        d2[:, j] = np.inf
        sizes[i] = ni + nj
        ids[i] = N + t
    return Dendrogram(tuple(merges), N)


def cut(dend: Dendrogram, k: int) -> List[int]:
    """Flat labels for k clusters: replay all but the k-1 last merges.

    Labels are numbered by first occurrence in leaf order.
    """
    N = dend.n_leaves
    if not 1 <= k <= N:
        raise ValueError(f"k must be in [1, {N}], got {k}")
    parent = list(range(2 * N - 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for t, m in enumerate(dend.merges[: N - k]):
        parent[find(m.a)] = N + t
        parent[find(m.b)] = N + t
    labels, seen = [], {}
    for leaf in range(N):
        root = find(leaf)
        labels.append(seen.setdefault(root, len(seen)))
    return labels


def adjusted_rand_index(a: Sequence[int], b: Sequence[int]) -> float:
    a = np.asarray(a)
    b = np.asarray(b)
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1))
    np.add.at(table, (ai, bi), 1)
    comb = lambda x: x * (x - 1) / 2.0
    index = comb(table).sum()
    ra = comb(table.sum(axis=1)).sum()
    rb = comb(table.sum(axis=0)).sum()
    expected = ra * rb / comb(len(a))
    top = (ra + rb) / 2.0
    if top == expected:
        return 1.0
    return float((index - expected) / (top - expected))


# ---------------------------------------------------------------------------
# Linear SVM


MULTICLASS = ("ovo", "ovr")


@dataclass(frozen=True, eq=False)
class SvmModel:
    classes: np.ndarray
    weights: np.ndarray  # (P, F): one row per binary problem
    bias: np.ndarray  # (P,)
    mean: np.ndarray
    scale: np.ndarray
    lam: float
    epochs: int
    seed: int
    multiclass: str = "ovo"
    pairs: Optional[np.ndarray] = None  # (P, 2) class indices for one-vs-one

    def decision_function(self, X) -> np.ndarray:
        """Raw scores of every binary problem (positive favours the first class of a pair)."""
        Z = (np.asarray(X, dtype=float) - self.mean) / self.scale
        return Z @ self.weights.T + self.bias

    def predict(self, X) -> np.ndarray:
        scores = self.decision_function(X)
        if self.multiclass == "ovr":
            return self.classes[np.argmax(scores, axis=1)]
        votes = np.zeros((len(scores), len(self.classes)), dtype=np.int64)
        rows = np.arange(len(scores))
        winner = np.where(scores > 0, self.pairs[:, 0], self.pairs[:, 1])
        for p in range(len(self.pairs)):
            votes[rows, winner[:, p]] += 1
        # ties go to the smallest class index
        return self.classes[np.argmax(votes, axis=1)]


def _standardize_stats(X):
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale == 0] = 1.0
    return mean, scale


def svm_objective(w, b, X, y, lam) -> float:
    """lam/2 |w|^2 + mean hinge loss for a binary problem with y in {-1, +1}."""
    margins = y * (X @ w + b)
    return float(0.5 * lam * (w @ w + b * b) + np.maximum(0.0, 1 - margins).mean())


def _pegasos(Z, Y, lam, epochs, rng):
    """Pegasos on augmented features Z (N, F) for the sign columns of Y (N, P) at once."""
    N, F = Z.shape
    W = np.zeros((Y.shape[1], F))
    avg = np.zeros_like(W)
    n_avg = 0
    t = 0
    start_avg = (epochs * N) // 2
    for _ in range(epochs):
        for i in rng.permutation(N):
            t += 1
            eta = 1.0 / (lam * t)
            yi = Y[i]
            viol = yi * (W @ Z[i]) < 1.0
            W *= 1.0 - eta * lam
            if viol.any():
                W[viol] += (eta * yi[viol])[:, None] * Z[i]
            if t > start_avg:
                n_avg += 1
                avg += (W - avg) / n_avg
    return avg if n_avg else W


def train_svm(X, y, lam: float = 1e-4, epochs: int = 50, seed: int = 0, multiclass: str = "ovo") -> SvmModel:
    """Linear SVMs trained by Pegasos stochastic subgradient steps.

    ``multiclass`` is "ovo" (one binary problem per class pair, majority vote)
    or "ovr" (one problem per class, largest score wins). Features are
    standardized with statistics of ``X``. The bias is an extra constant
    feature and is regularized with the weights. Each epoch visits the samples
    in a seed-determined order; the step at iteration t is 1 / (lam * t) and
    the returned weights average the iterates of the last half of training.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError("X must be (N, F) with one label per row")
    if not np.all(np.isfinite(X)):
        raise ValueError("features must be finite")
    classes = np.unique(y)
    if len(classes) < 2:
        raise ValueError("train_svm needs at least two classes")
    if lam <= 0 or epochs < 1:
        raise ValueError("lam must be positive and epochs >= 1")
    if multiclass not in MULTICLASS:
        raise ValueError(f"multiclass must be one of {MULTICLASS}")

    mean, scale = _standardize_stats(X)
    Z = np.hstack([(X - mean) / scale, np.ones((len(X), 1))])
    rng = np.random.default_rng(seed)
    if multiclass == "ovr":
        Y = np.where(y[:, None] == classes[None, :], 1.0, -1.0)
        W = _pegasos(Z, Y, lam, epochs, rng)
        pairs = None
    else:
        pairs = np.array([(a, b) for a in range(len(classes)) for b in range(a + 1, len(classes))])
        rows = []
        for a, b in pairs:
            sel = (y == classes[a]) | (y == classes[b])
            Y = np.where(y[sel] == classes[a], 1.0, -1.0)[:, None]
            rows.append(_pegasos(Z[sel], Y, lam, epochs, rng)[0])
        W = np.array(rows)
    return SvmModel(classes, W[:, :-1].copy(), W[:, -1].copy(), mean, scale, lam, epochs, seed, multiclass, pairs)


def stratified_folds(y, folds: int, seed: int) -> np.ndarray:
    """Fold index per sample: each class is shuffled by ``seed`` and dealt round-robin."""
    y = np.asarray(y)
    if folds < 2:
        raise ValueError("need at least 2 folds")
    assign = np.empty(len(y), dtype=np.int64)
    rng = np.random.default_rng(seed)
    offset = 0
    for c in np.unique(y):
        idx = np.nonzero(y == c)[0]
        if len(idx) < folds:
            raise ValueError(f"class {c!r} has {len(idx)} samples, fewer than {folds} folds")
        perm = idx[rng.permutation(len(idx))]
        assign[perm] = (np.arange(len(idx)) + offset) % folds
        offset += len(idx)
    return assign


@dataclass
class CvReport:
    mean: float
    std: float
    per_fold: List[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"mean": self.mean, "std": self.std, "per_fold": list(self.per_fold)}


def cross_validate(X, y, folds: int = 10, lam: float = 1e-4, epochs: int = 50, seed: int = 0,
                   workers: int = 1, multiclass: str = "ovo") -> CvReport:
    """Stratified k-fold accuracy of ``train_svm``; std is the sample std over folds."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    assign = stratified_folds(y, folds, seed)

    def run(f):
        test = assign == f
        model = train_svm(X[~test], y[~test], lam, epochs, seed + f, multiclass)
        return float(np.mean(model.predict(X[test]) == y[test]))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            acc = list(pool.map(run, range(folds)))
    else:
        acc = [run(f) for f in range(folds)]
    return CvReport(float(np.mean(acc)), float(np.std(acc, ddof=1)), acc)
