import os
from pathlib import Path

import numpy as np
import pytest

from wect.complex import WeightedComplex, image_to_weighted_complex


def random_image(rng, shape=(8, 8), high=9, density=0.6):
    img = rng.integers(1, high + 1, size=shape)
    img[rng.random(shape) > density] = 0
    return img


def random_complex(rng, shape=(8, 8), high=9):
    K = WeightedComplex.empty()
    while K.is_empty():
        K = image_to_weighted_complex(random_image(rng, shape, high))
    return K


def brute_force_complex(image):
    """Independent, dictionary-based enumeration of the pixel triangulation.

    Returns (vertex weights keyed by (x, y), edge weights keyed by frozenset of
    two points, triangle weights keyed by frozenset of three points), where
    a triangle's weight may be listed only once (no two pixels share one).
    """
    verts, edges, tris = {}, {}, {}
    for i, row in enumerate(image):
        for j, val in enumerate(row):
            if val == 0:
                continue
            c = (float(j), float(-i))
            corners = [(j - 0.5, -i + 0.5), (j + 0.5, -i + 0.5), (j + 0.5, -i - 0.5), (j - 0.5, -i - 0.5)]
            for a in range(4):
                p, q = corners[a], corners[(a + 1) % 4]
                tris[frozenset([c, p, q])] = float(val)
    for tri, w in tris.items():
        pts = list(tri)
        for p in pts:
            verts[p] = max(verts.get(p, 0.0), w)
        for a in range(3):
            for b in range(a + 1, 3):
                e = frozenset([pts[a], pts[b]])
                edges[e] = max(edges.get(e, 0.0), w)
    return verts, edges, tris


def complex_as_point_sets(K):
    pos = [tuple(map(float, p)) for p in K.positions]
    verts = {pos[i]: float(w) for i, w in enumerate(K.vw)}
    edges = {frozenset(pos[i] for i in e): float(w) for e, w in zip(K.edges.tolist(), K.ew)}
    tris = {frozenset(pos[i] for i in t): float(w) for t, w in zip(K.triangles.tolist(), K.tw)}
    return verts, edges, tris


def find_mnist_dir():
    """(images, labels) IDX paths from $WECT_MNIST_DIR or ./data/mnist; official train names win."""
    candidates = [os.environ.get("WECT_MNIST_DIR"), Path(__file__).resolve().parents[1] / "data" / "mnist"]
    for c in candidates:
        if not c:
            continue
        c = Path(c)
        for prefix in ("train", "mnist10k"):
            for suffix in ("", ".gz"):
                img = c / f"{prefix}-images-idx3-ubyte{suffix}"
                lab = c / f"{prefix}-labels-idx1-ubyte{suffix}"
                if img.exists() and lab.exists():
                    return img, lab
    return None


@pytest.fixture(scope="session")
def mnist_train():
    from wect.ingest import load_mnist

    paths = find_mnist_dir()
    if paths is None:
        pytest.fail("MNIST training files not found; set WECT_MNIST_DIR (see README)")
    return load_mnist(*paths)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
