"""Rebuild IDX files from the digit bundle shipped in the npm ``mnist`` package.

That package stores ~10,000 MNIST digits (28x28) per class as JSON floats
rounded to round(byte / 255, 3); multiplying by 255 and rounding recovers the
original bytes exactly. Usage:

    npm pack mnist && tar xzf mnist-*.tgz
    python scripts/mnist_from_npm.py package/src/digits data/mnist
"""
import gzip
import json
import sys
from pathlib import Path

import numpy as np

from wect.ingest import write_idx_images, write_idx_labels


def main(digits_dir, out_dir):
    digits_dir, out_dir = Path(digits_dir), Path(out_dir)
    images, labels = [], []
    for d in range(10):
        raw = np.asarray(json.loads((digits_dir / f"{d}.json").read_text())["data"], dtype=float)
        scaled = raw * 255
        b = np.round(scaled)
        if np.abs(scaled - b).max() > 0.13 or b.min() < 0 or b.max() > 255 or len(raw) % 784:
            raise SystemExit(f"{d}.json does not look like 3-decimal byte/255 data")
        images.append(b.astype(np.uint8).reshape(-1, 28, 28))
        labels.append(np.full(len(images[-1]), d, dtype=np.uint8))
    images = np.concatenate(images)
    labels = np.concatenate(labels)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, payload in (("mnist10k-images-idx3-ubyte.gz", write_idx_images(images)),
                          ("mnist10k-labels-idx1-ubyte.gz", write_idx_labels(labels))):
        # mtime=0 keeps the archive byte-identical across runs
        (out_dir / name).write_bytes(gzip.compress(payload, mtime=0))
    print(f"wrote {len(labels)} digits to {out_dir}")


if __name__ == "__main__":
    main(*sys.argv[1:3])
