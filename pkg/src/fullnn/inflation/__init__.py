from fullnn.inflation.bilocal import (
    ClassicalSide,
    Event,
    InflationProgram,
    InflationSpec,
    MarginalRow,
    SignalingBehaviorError,
    VariableLayout,
    build_bilocal_inflation_lp,
    compile_inflation,
    inflation_spec,
)
from fullnn.inflation.certify import (
    FullNNReport,
    OrientationReport,
    Verdict,
    certify_full_nn,
    certify_grid,
    certify_point,
)
from fullnn.inflation.ns_polytope import NSExpression, ns_polytope_program, ns_polytope_value
from fullnn.inflation.simulation import (
    NonMonotoneFeasibilityError,
    build_simulation_lp,
    max_visibility_simulable,
)
from fullnn.inflation.witnesses import (
    CertificateDoc,
    UnverifiedCertificateError,
    certificate_from_doc,
    certificate_to_doc,
    certificate_to_witness,
    certificate_value,
)

__all__ = [
    "CertificateDoc",
    "ClassicalSide",
    "Event",
    "FullNNReport",
    "InflationProgram",
    "InflationSpec",
    "MarginalRow",
    "NSExpression",
    "NonMonotoneFeasibilityError",
    "OrientationReport",
    "SignalingBehaviorError",
    "UnverifiedCertificateError",
    "VariableLayout",
    "Verdict",
    "build_bilocal_inflation_lp",
    "build_simulation_lp",
    "certificate_from_doc",
    "certificate_to_doc",
    "certificate_to_witness",
    "certificate_value",
    "certify_full_nn",
    "certify_grid",
    "certify_point",
    "compile_inflation",
    "inflation_spec",
    "max_visibility_simulable",
    "ns_polytope_program",
    "ns_polytope_value",
]
