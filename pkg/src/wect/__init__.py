"""Weighted Euler curve transforms (WECT) for weighted simplicial complexes built from images."""
from .complex import (NormalizationRecord, WeightedComplex, euler_characteristic, image_to_weighted_complex,
                      is_admissible, normalize, rotate, superlevel_subcomplex, superlevel_sum_oracle, validate,
                      weighted_euler_characteristic)
from .errors import ContractError, IncompatibleWectError, ParseError
from .metric import DistanceMatrix, distance_matrix, register_rotation, shift_wect, wect_distance
from .transform import (DirectionScheme, FiltrationGrid, SmoothingSpec, Wect, compute_ect, compute_wect, euler_curve,
                        height_filtration, smooth, weighted_euler_curve)

__version__ = "0.1.0"
