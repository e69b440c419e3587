"""Empirical checks of lower curvature bounds on sampled metric spaces."""
from .comparison import (
    ComparisonReport,
    DomainCertificate,
    Hinge,
    HingeAngle,
    QuadrupleVerdict,
    Strategy,
    adjacent_angle_check,
    hinge_angle,
    kappa_domain_check,
    make_hinge,
    max_lower_bound,
    quadruple_check,
    scan_quadruples,
)
from .constructions import (
    CradleTrace,
    KeyLemmaResult,
    RadialCurve,
    cats_cradle,
    cradle_domain_containment,
    key_lemma_check,
    radial_curve,
    radial_monotonicity_check,
)
from .globalization import (
    GlobalizationReport,
    KappaDomainCover,
    domain_merge_check,
    geodesic_containment_scan,
    globalization_experiment,
    reformulation_check,
    reformulation_sweep,
    segment_chain,
)
from .metric_space import (
    Ball,
    DiscreteGeodesic,
    InvalidSpace,
    MetricSpaceSample,
    SpaceSpec,
    completion,
    generate_space,
    geodesic,
    load_distance_matrix,
    parse_space_spec,
)
from .model_plane import (
    Curvature,
    ModelTriangle,
    alexandrov_lemma_split,
    dist_to_opposite_side,
    model_angle,
    model_diameter,
    model_side,
)

__version__ = "0.1.0"
