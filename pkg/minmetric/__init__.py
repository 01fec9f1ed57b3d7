"""
Numerical lab for the minimal metric of convex bodies: pointwise Finsler
metrics, intrinsic distance bounds and Gromov-hyperbolicity diagnostics.
"""
from .config import LabConfig, load_config
from .convex_body import (
    Ball,
    ConvexBody,
    Cylinder,
    Ellipsoid,
    EuclideanFactor,
    HalfSpace,
    Polytope,
    Product,
    load_body_spec,
    parse_body_spec,
)
from .distances import DistanceReport, GeodesicGraph, Polyline
from .errors import MinMetricError
from .finsler_metrics import MetricTag, make_evaluator
from .gromov import HyperbolicityReport, QuadrupleSample, QuasiGeodesic

__all__ = [
    "Ball",
    "ConvexBody",
    "Cylinder",
    "DistanceReport",
    "Ellipsoid",
    "EuclideanFactor",
    "GeodesicGraph",
    "HalfSpace",
    "HyperbolicityReport",
    "LabConfig",
    "MetricTag",
    "MinMetricError",
    "Polyline",
    "Polytope",
    "Product",
    "QuadrupleSample",
    "QuasiGeodesic",
    "load_body_spec",
    "load_config",
    "make_evaluator",
    "parse_body_spec",
]
