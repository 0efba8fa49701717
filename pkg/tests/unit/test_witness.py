from __future__ import annotations

import numpy as np
import pytest

from fullnn.quantum import bsm_protocol_behavior, ejm_correlations, star_quantum_behavior
from fullnn.scenario import CorrelatorSpec, ScenarioMismatchError, signs_pm
from fullnn.strategies import bilocal_pr_family
from fullnn.witness import (
    Direction,
    StarIndex,
    WitnessExpr,
    WitnessExprDoc,
    WitnessTerm,
    best_theta_for_visibility,
    bilocal_I,
    bilocal_ns_sum,
    bilocal_to_star,
    bsm_threshold,
    bsm_witnesses,
    ejm_witness_c_ns,
    ejm_witness_closed_form,
    ejm_witness_ns_c,
    eval_witness,
    evaluate,
    full_nn_bound_s3,
    s3_nonfull_bound_grid,
    sn,
    star_I_all,
    v_crit,
    v_crit_numeric,
    witness_from_doc,
    witness_to_doc,
)

THETA_STAR = float(np.arccos(np.sqrt(5) / 3))


@pytest.mark.parametrize("theta", [0.0, 0.4, THETA_STAR, 1.2, np.pi / 2])
@pytest.mark.parametrize("v", [0.3, 0.8, 1.0])
def test_ejm_witnesses_match_closed_form(theta: float, v: float) -> None:
    b = ejm_correlations(theta, v)
    expected = ejm_witness_closed_form(theta, v)

    assert evaluate(ejm_witness_c_ns(), b) == pytest.approx(expected, abs=1e-10)
    assert evaluate(ejm_witness_ns_c(), b) == pytest.approx(expected, abs=1e-10)


def test_v_crit_minimum() -> None:
    assert v_crit(THETA_STAR) == pytest.approx(2 / np.sqrt(5), abs=1e-12)
    assert best_theta_for_visibility(2 / np.sqrt(5)) == pytest.approx(THETA_STAR, abs=1e-12)
    grid = np.linspace(0.0, np.pi / 2, 401)
    assert min(v_crit(t) for t in grid) >= 2 / np.sqrt(5) - 1e-12


@pytest.mark.parametrize("theta", [0.0, 0.3, THETA_STAR, 1.0])
def test_v_crit_numeric_agrees_with_closed_form(theta: float) -> None:
    assert v_crit_numeric(theta) == pytest.approx(v_crit(theta), abs=1e-9)


def test_eval_witness_reports_violation(ejm_pi4) -> None:
    result = eval_witness(ejm_witness_c_ns(), ejm_pi4)

    assert result.violated
    assert result.value == pytest.approx(0.5 * (1 + np.sqrt(2)), abs=1e-10)
    assert result.direction is Direction.LE


def test_ge_direction() -> None:
    w = WitnessExpr((WitnessTerm(1.0, (CorrelatorSpec(),)),), 2.0, Direction.GE)

    assert w.is_violated(1.5)
    assert not w.is_violated(2.5)


def test_witness_term_needs_factors() -> None:
    with pytest.raises(ValueError, match="factor"):
        WitnessTerm(1.0, ())


def test_witness_doc_survives_json() -> None:
    w = ejm_witness_ns_c()
    doc = WitnessExprDoc.model_validate_json(witness_to_doc(w).model_dump_json())

    assert witness_from_doc(doc) == w


def test_bilocal_I_checks_arguments(ejm_pi4, pr_bilocal) -> None:
    with pytest.raises(ValueError, match="t must be"):
        bilocal_I(pr_bilocal, 2)
    with pytest.raises(ScenarioMismatchError):
        bilocal_I(ejm_pi4, 0)


def test_bilocal_ns_sum_of_family() -> None:
    assert bilocal_ns_sum(bilocal_pr_family(0.35)) == pytest.approx(1.0, abs=1e-12)


def test_bilocal_to_star_keeps_the_functionals() -> None:
    b = bilocal_pr_family(0.2)
    star = bilocal_to_star(b)

    np.testing.assert_allclose(star_I_all(star), [bilocal_I(b, 0), bilocal_I(b, 1)], atol=1e-12)


def test_star_index_bits() -> None:
    idx = StarIndex(3, 2)

    assert idx.bits == (1, 0)
    assert idx.t_tilde == (1, 1, 0)
    assert idx.t_hat == (1, 1, 0)
    with pytest.raises(ValueError):
        StarIndex(3, 4)


def test_sn_rejects_wrong_size() -> None:
    with pytest.raises(ScenarioMismatchError):
        sn(star_quantum_behavior(3, 1.0), 4)


def test_s3_nonfull_bound_matches_full_nn_bound() -> None:
    assert s3_nonfull_bound_grid() == pytest.approx(full_nn_bound_s3(), abs=1e-12)


def test_bsm_witnesses_at_unit_visibility() -> None:
    r_c_ns, r_ns_c = bsm_witnesses(bsm_protocol_behavior(1.0))

    assert r_c_ns == pytest.approx(5 / np.sqrt(2), abs=1e-10)
    assert r_ns_c == pytest.approx(5 / np.sqrt(2), abs=1e-10)


def test_bsm_threshold_is_where_witnesses_reach_three() -> None:
    v = bsm_threshold()

    assert v == pytest.approx(0.921155, abs=1e-6)
    r_c_ns, r_ns_c = bsm_witnesses(bsm_protocol_behavior(v))
    assert r_c_ns == pytest.approx(3.0, abs=1e-9)
    assert r_ns_c == pytest.approx(3.0, abs=1e-9)


def test_bsm_witnesses_need_ternary_bob(pr_bilocal) -> None:
    with pytest.raises(ScenarioMismatchError):
        bsm_witnesses(pr_bilocal)


def test_single_party_correlator_factor() -> None:
    spec = CorrelatorSpec.of({"C": (2, signs_pm())})
    w = WitnessExpr((WitnessTerm(1.0, (spec, spec)),), 1.0)

    assert evaluate(w, ejm_correlations(0.5, 0.7)) == pytest.approx(0.0, abs=1e-12)
