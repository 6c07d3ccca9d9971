"""Exact coarse geometry of finite wreath-type spaces: metrics, walls, lifted walls, distortion certificates and box spaces."""
from ._validation import CapExceeded, PropertyViolation
from .analysis import (
    certify_c1c2,
    comp_lower_bound,
    compression_fit,
    compute_moduli,
    empirical_moduli,
    lifting_modulus,
    poly_fit,
)
from .boxspace import assemble_box, box_embedding, build_wreath_chain, check_M_chain, finite_H_box
from .embedding import EmbeddingTable
from .groups import FiniteGroup, cyclic, symmetric, wreath_product
from .lift import LambdaStructure, LiftedWalls, assemble_lambda, hypothesis_check, lift_embedding, lift_metric
from .metric import DenseMap, FiniteMetricSpace, cycle_metric, path_metric, validate_metric, word_metric
from .walls import (
    WallsStructure,
    canonical_walls,
    cut_decompose,
    cycle_walls,
    discrete_walls,
    embed_l1,
    embed_lp,
    path_walls,
    wall_metric,
)
from .wreath import PointSet, WreathInstance, WreathPoint, ball_pointset, lamplighter_instance, path_through, wreath_distance

__all__ = [
    "CapExceeded",
    "PropertyViolation",
    "certify_c1c2",
    "comp_lower_bound",
    "compression_fit",
    "compute_moduli",
    "empirical_moduli",
    "lifting_modulus",
    "poly_fit",
    "assemble_box",
    "box_embedding",
    "build_wreath_chain",
    "check_M_chain",
    "finite_H_box",
    "EmbeddingTable",
    "FiniteGroup",
    "cyclic",
    "symmetric",
    "wreath_product",
    "LambdaStructure",
    "LiftedWalls",
    "assemble_lambda",
    "hypothesis_check",
    "lift_embedding",
    "lift_metric",
    "DenseMap",
    "FiniteMetricSpace",
    "cycle_metric",
    "path_metric",
    "validate_metric",
    "word_metric",
    "WallsStructure",
    "canonical_walls",
    "cycle_walls",
    "discrete_walls",
    "path_walls",
    "cut_decompose",
    "embed_l1",
    "embed_lp",
    "wall_metric",
    "PointSet",
    "WreathInstance",
    "ball_pointset",
    "WreathPoint",
    "lamplighter_instance",
    "path_through",
    "wreath_distance",
]

__version__ = "0.1.0"
