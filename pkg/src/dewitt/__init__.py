"""Geometry of the canonical (DeWitt/Ebin) metric on the space of Riemannian metrics.

Metric values are SPD matrices and tangent vectors symmetric matrices; all
point operations broadcast over leading batch axes.  Sampled fields live in
:mod:`dewitt.fieldmanifold`.
"""

from .exceptions import (
    DewittError,
    DimensionMismatchError,
    DocumentError,
    DomainError,
    FieldPointError,
    IntegrationError,
    NonlinearMapError,
    NotPositiveDefiniteError,
    NotSymmetricError,
)
from .fieldmanifold import (
    MetricField,
    MetricPath,
    SampledBase,
    TangentField,
    TangentPath,
    energy,
    field_exp,
    field_existence_interval,
    field_geodesic,
    field_jacobi,
    field_log,
    field_map,
    first_variation,
    global_inner,
    global_ricci,
)
from .geoexp import (
    existence_interval,
    exp_point,
    figure1_map,
    geodesic_point,
    geodesic_velocity_mixed,
    in_exp_domain,
    in_log_domain,
    log_point,
)
from .jacobi import jacobi_field, jacobi_rhs, variation_alpha
from .pointgeo import (
    PointMetric,
    christoffel,
    curvature,
    dgamma,
    inner_g,
    ricci_like,
    scalar_like,
)

__version__ = "0.1.0"

__all__ = [
    "DewittError",
    "DimensionMismatchError",
    "DocumentError",
    "DomainError",
    "FieldPointError",
    "IntegrationError",
    "NonlinearMapError",
    "NotPositiveDefiniteError",
    "NotSymmetricError",
    "MetricField",
    "MetricPath",
    "SampledBase",
    "TangentField",
    "TangentPath",
    "energy",
    "field_exp",
    "field_existence_interval",
    "field_geodesic",
    "field_jacobi",
    "field_log",
    "field_map",
    "first_variation",
    "global_inner",
    "global_ricci",
    "existence_interval",
    "exp_point",
    "figure1_map",
    "geodesic_point",
    "geodesic_velocity_mixed",
    "in_exp_domain",
    "in_log_domain",
    "log_point",
    "jacobi_field",
    "jacobi_rhs",
    "variation_alpha",
    "PointMetric",
    "christoffel",
    "curvature",
    "dgamma",
    "inner_g",
    "ricci_like",
    "scalar_like",
]
