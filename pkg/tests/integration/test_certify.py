"""
End-to-end certification of EJM correlations through both inflation orientations.

These build the full 3456-variable programs and go through HiGHS.

Run: pytest tests/integration/test_certify.py -v
"""
from __future__ import annotations

import numpy as np
import pytest

from fullnn.inflation import (
    CertificateDoc,
    ClassicalSide,
    UnverifiedCertificateError,
    Verdict,
    build_bilocal_inflation_lp,
    build_simulation_lp,
    certificate_from_doc,
    certificate_to_witness,
    certificate_value,
    certify_full_nn,
    certify_grid,
    compile_inflation,
    inflation_spec,
)
from fullnn.inflation.witnesses import check_certificate_scenario
from fullnn.lp import FarkasCertificate, SolveStatus, solve_feasibility
from fullnn.quantum import ejm_correlations
from fullnn.scenario import ScenarioMismatchError, ejm_scenario, uniform_behavior
from fullnn.strategies import (
    bilocal_pr_family,
    bilocal_pr_strategy,
    simulate_theta0,
    simulate_theta_pi2,
)
from fullnn.witness import evaluate

pytestmark = [pytest.mark.integration, pytest.mark.slow, pytest.mark.timeout(900)]


@pytest.fixture(scope="module")
def report_pi4():
    return certify_full_nn(ejm_correlations(np.pi / 4, 1.0))


class TestVerdicts:
    @pytest.mark.parametrize(
        ("theta", "v"),
        [(np.pi / 4, 1.0), (0.7297, 0.9), (1.2, 1.0)],
    )
    def test_certified_points(self, theta: float, v: float) -> None:
        report = certify_full_nn(ejm_correlations(theta, v))

        assert report.verdict is Verdict.CERTIFIED
        for o in report.orientations:
            assert o.status is SolveStatus.INFEASIBLE
            assert o.certificate_value is not None and o.certificate_value > 0

    @pytest.mark.parametrize("theta", [0.0, np.pi / 2])
    def test_endpoints_not_certified(self, theta: float) -> None:
        report = certify_full_nn(ejm_correlations(theta, 1.0))

        assert report.verdict is Verdict.NOT_CERTIFIED
        assert report.orientation(ClassicalSide.BOB_CHARLIE).status is SolveStatus.FEASIBLE

    @pytest.mark.parametrize(
        ("make", "side"),
        [
            (simulate_theta0, ClassicalSide.BOB_CHARLIE),
            (simulate_theta_pi2, ClassicalSide.BOB_CHARLIE),
            (bilocal_pr_strategy, ClassicalSide.ALICE_BOB),
            (lambda: bilocal_pr_family(1.0, {"A": (1, 0), "C": (0, 1)}), ClassicalSide.ALICE_BOB),
        ],
        ids=["sim-theta0", "sim-theta-pi2", "bilocal-pr", "bilocal-pr-family-flipped"],
    )
    def test_hybrid_model_is_feasible_in_its_orientation(self, make, side, config) -> None:
        lp = build_bilocal_inflation_lp(make(), side, config)

        assert solve_feasibility(lp, config).feasible

    @pytest.mark.parametrize(("theta", "v"), [(0.65, 0.78), (0.3, 0.8)])
    def test_simulable_points_are_feasible_in_bob_charlie_inflation(
        self, theta: float, v: float, config
    ) -> None:
        target = ejm_correlations(theta, v)
        assert solve_feasibility(build_simulation_lp(target), config).feasible

        lp = build_bilocal_inflation_lp(target, ClassicalSide.BOB_CHARLIE, config)

        assert solve_feasibility(lp, config).feasible

    def test_parallel_matches_sequential(self, report_pi4) -> None:
        parallel = certify_full_nn(ejm_correlations(np.pi / 4, 1.0), parallel=True)

        assert parallel.verdict is report_pi4.verdict
        assert [o.orientation for o in parallel.orientations] == list(ClassicalSide)

    def test_report_serializes(self, report_pi4) -> None:
        payload = report_pi4.model_dump(mode="json")

        assert payload["verdict"] == "full-NN certified"
        assert {o["orientation"] for o in payload["orientations"]} == {"alice-bob", "bob-charlie"}
        assert len(payload["behavior_sha256"]) == 64

    def test_certify_grid_keeps_order(self) -> None:
        rows = certify_grid([0.0, np.pi / 4], 1.0)

        assert [r[0] for r in rows] == [0.0, np.pi / 4]
        assert [r[2] for r in rows] == [Verdict.NOT_CERTIFIED, Verdict.CERTIFIED]


class TestCertificates:
    @pytest.mark.parametrize("side", list(ClassicalSide))
    def test_doc_round_trip_and_witness_value(self, report_pi4, side: ClassicalSide) -> None:
        b = ejm_correlations(np.pi / 4, 1.0)
        doc = CertificateDoc.model_validate_json(
            report_pi4.orientation(side).certificate.model_dump_json()
        )
        cert, spec = certificate_from_doc(doc)
        program = compile_inflation(spec)

        direct = certificate_value(program, cert, b)
        witness = certificate_to_witness(cert, spec)

        assert direct > 0
        assert evaluate(witness, b) == pytest.approx(direct, rel=1e-8, abs=1e-10)
        assert witness.is_violated(evaluate(witness, b))

    def test_witness_is_sound_on_hybrid_model(self, report_pi4) -> None:
        doc = report_pi4.orientation(ClassicalSide.BOB_CHARLIE).certificate
        cert, spec = certificate_from_doc(doc)
        witness = certificate_to_witness(cert, spec)

        assert evaluate(witness, simulate_theta0()) <= 1e-7
        assert evaluate(witness, uniform_behavior(ejm_scenario())) <= 1e-7

    def test_tampered_multipliers_rejected(self, report_pi4) -> None:
        doc = report_pi4.orientation(ClassicalSide.ALICE_BOB).certificate
        cert, spec = certificate_from_doc(doc)
        y = np.array(cert.y, copy=True)
        # pushes y.A above zero on the variables of that marginal row
        y[compile_inflation(spec).marginal_rows[0].row] += 10.0 * max(1.0, np.abs(y).max())

        with pytest.raises(UnverifiedCertificateError):
            certificate_to_witness(FarkasCertificate(y, cert.row_ids), spec)

    def test_scenario_check(self, report_pi4, pr_bilocal) -> None:
        doc = report_pi4.orientation(ClassicalSide.ALICE_BOB).certificate

        check_certificate_scenario(doc, ejm_correlations(0.3, 0.5))
        with pytest.raises(ScenarioMismatchError):
            check_certificate_scenario(doc, pr_bilocal)

    def test_certificate_spec_matches_program(self, report_pi4) -> None:
        doc = report_pi4.orientation(ClassicalSide.ALICE_BOB).certificate
        _, spec = certificate_from_doc(doc)

        assert spec == inflation_spec(ejm_scenario(), ClassicalSide.ALICE_BOB)
