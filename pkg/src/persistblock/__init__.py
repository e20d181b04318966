"""Vectorized persistence blocks and experiment harnesses."""

__version__ = "0.1.0"

from .diagram import Diagram, Domain, bounding_domain, pad_to_cardinality
from .block import BlockConfig, LengthFunction, WeightFunction, block_l2_distance
from .vectorize import GridPartition, FeatureVector, vpb
from .metrics import wasserstein, vector_distance, pairwise_matrix

__all__ = [
    "Diagram",
    "Domain",
    "bounding_domain",
    "pad_to_cardinality",
    "BlockConfig",
    "LengthFunction",
    "WeightFunction",
    "block_l2_distance",
    "GridPartition",
    "FeatureVector",
    "vpb",
    "wasserstein",
    "vector_distance",
    "pairwise_matrix",
]
