"""Normalized Ricci flow on the Bianchi-class 3-geometries and first-eigenvalue envelopes."""

from .analysis import (
    Direction,
    LemmaId,
    LemmaReport,
    TauCertificate,
    check_monotone,
    detect_tau,
    verify_lemma,
)
from .eigen_bounds import (
    ConstantFractions,
    Convention,
    EigenEnvelope,
    ExtremalMax,
    ExtremalMin,
    Factor,
    PiecewiseRandom,
    Series,
    TheoremBoundParams,
    e11_constants,
    envelope_integrate,
    monotone_quantity,
    reaction_coefficients,
    synth_lambda,
    theorem_bounds,
)
from .flow import (
    FlowTrajectory,
    IntegratorControls,
    closed_form_state,
    closed_form_trajectory,
    conservation_report,
    integrate,
    sample_initial_states,
)
from .geometry import (
    BianchiClass,
    CurvatureData,
    MetricState,
    flow_rhs,
    ricci_components,
    structure_constants,
)

__version__ = "0.1.0"
