"""Image -> complex -> (smoothed) WECT pipeline with a single config object."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from typing import Iterable, List, Optional

import numpy as np

from .complex import WeightedComplex, image_to_weighted_complex, normalize
from .errors import ContractError
from .transform import DirectionScheme, FiltrationGrid, SmoothingSpec, Wect, compute_ect, compute_wect, smooth


@dataclass(frozen=True)
class PipelineConfig:
    directions: int = 25
    samples: int = 50
    lo: float = -1.0
    hi: float = 1.0
    window_fraction: float = 0.2
    sigma_fraction: float = 1.0 / 3.0  # sigma = sigma_fraction * window
    smooth: bool = True
    register: bool = True
    normalize: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.directions < 2:
            raise ValueError("directions must be >= 2")
        if self.samples < 2:
            raise ValueError("samples must be >= 2")
        if not 0 < self.window_fraction < 1:
            raise ValueError("window_fraction must be in (0, 1)")
        if not self.sigma_fraction > 0:
            raise ValueError("sigma_fraction must be positive")
        if not self.lo < self.hi:
            raise ValueError("lo must be < hi")

    @property
    def scheme(self) -> DirectionScheme:
        return DirectionScheme(self.directions)

    @property
    def grid(self) -> FiltrationGrid:
        return FiltrationGrid(self.samples, self.lo, self.hi)

    @property
    def smoothing(self) -> Optional[SmoothingSpec]:
        window = int(round(self.window_fraction * self.samples))
        if not self.smooth or window < 1:
            return None
        return SmoothingSpec(window, self.sigma_fraction * window)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_mapping(cls, d: dict) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


def complex_wect(K: WeightedComplex, config: PipelineConfig, weighted: bool = True) -> Wect:
    if K.is_empty():
        raise ContractError("cannot compute the transform of an empty complex")
    if config.normalize:
        K, _ = normalize(K)
    compute = compute_wect if weighted else compute_ect
    w = compute(K, config.scheme, config.grid)
    spec = config.smoothing
    return smooth(w, spec) if spec is not None else w


def image_wect(image, config: PipelineConfig, weighted: bool = True) -> Wect:
    return complex_wect(image_to_weighted_complex(image), config, weighted)


def _features_chunk(args):
    images, config, weighted = args
    return np.stack([image_wect(im, config, weighted).vectorize() for im in images])


def wect_features(images: Iterable, config: PipelineConfig, weighted: bool = True, workers: int = 1) -> np.ndarray:
    """Stack vectorized WECTs (or ECTs) of ``images`` into an (N, m*n) array."""
    images = list(images)
    if workers <= 1 or len(images) < 2 * workers:
        return _features_chunk((images, config, weighted))
    chunks = [images[i::workers] for i in range(workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_features_chunk, [(c, config, weighted) for c in chunks]))
    out = np.empty((len(images), parts[0].shape[1]))
    for i, part in enumerate(parts):
        out[i::workers] = part
    return out
