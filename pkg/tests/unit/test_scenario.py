from __future__ import annotations

import json

import numpy as np
import pytest

from fullnn.quantum import ejm_correlations
from fullnn.scenario import (
    BehaviorValidationError,
    CorrelatorSpec,
    Nature,
    Party,
    Scenario,
    ScenarioMismatchError,
    Source,
    behavior_from_json,
    behavior_new,
    behavior_to_json,
    bilocal_scenario,
    bit_signs,
    correlator,
    ejm_scenario,
    is_no_signaling,
    mix,
    signs_pm,
    star_scenario,
    tetra_signs,
    uniform_behavior,
)
from fullnn.strategies import chsh, pr_box


def test_scenario_shapes() -> None:
    s = ejm_scenario()

    assert s.names == ("A", "B", "C")
    assert s.shape == (3, 1, 3, 2, 4, 2)
    assert s.size == 3 * 3 * 2 * 4 * 2
    assert star_scenario(3).shape == (2, 2, 2, 1, 2, 2, 2, 8)


def test_scenario_rejects_duplicate_names() -> None:
    with pytest.raises(ScenarioMismatchError, match="duplicate"):
        Scenario((Party("A", 2, 2), Party("A", 2, 2)))


def test_scenario_rejects_unattached_party() -> None:
    with pytest.raises(ScenarioMismatchError, match="not attached"):
        Scenario((Party("A", 2, 2), Party("B", 1, 2), Party("C", 2, 2)), (Source((0, 1)),))


def test_star_needs_two_branches() -> None:
    with pytest.raises(ScenarioMismatchError):
        star_scenario(1)


def test_behavior_new_rejects_negative_entries() -> None:
    s = Scenario((Party("A", 1, 2),))
    with pytest.raises(BehaviorValidationError, match="negative"):
        behavior_new(s, [1.1, -0.1])


def test_behavior_new_rejects_bad_normalization() -> None:
    s = Scenario((Party("A", 1, 2),))
    with pytest.raises(BehaviorValidationError, match="normalization"):
        behavior_new(s, [0.5, 0.6])


def test_behavior_new_rejects_wrong_size() -> None:
    with pytest.raises(BehaviorValidationError, match="entries"):
        behavior_new(ejm_scenario(), np.zeros(10))


def test_behavior_new_tolerates_rounding() -> None:
    s = Scenario((Party("A", 1, 2),))
    b = behavior_new(s, [0.5 + 1e-13, 0.5 - 1e-13])

    assert not b.data.flags.writeable


def test_pr_box_is_no_signaling_with_chsh_four() -> None:
    box = pr_box()

    assert is_no_signaling(box)
    assert chsh(box) == pytest.approx(4.0, abs=1e-12)


def test_signaling_table_detected() -> None:
    s = Scenario((Party("P1", 2, 2), Party("P2", 2, 2)))
    data = np.zeros(s.shape)
    for i1 in range(2):
        for i2 in range(2):
            data[i1, i2, i2, 0] = 1.0  # P1 copies P2's input
    b = behavior_new(s, data)

    assert not is_no_signaling(b)


def test_is_no_signaling_rejects_non_positive_tol(pr_bilocal) -> None:
    with pytest.raises(ValueError):
        is_no_signaling(pr_bilocal, tol=0.0)


def test_marginal_keeps_party_order(ejm_pi4) -> None:
    m = ejm_pi4.marginal(("C", "A"))

    assert m.scenario.names == ("A", "C")
    assert m.data.shape == (3, 3, 2, 2)
    np.testing.assert_allclose(m.data, 0.25, atol=1e-12)


def test_correlator_of_empty_spec_is_one(ejm_pi4) -> None:
    assert correlator(ejm_pi4, CorrelatorSpec()) == pytest.approx(1.0, abs=1e-12)


def test_correlator_checks_inputs_and_sign_maps(ejm_pi4) -> None:
    with pytest.raises(ScenarioMismatchError, match="out of range"):
        correlator(ejm_pi4, CorrelatorSpec.of({"A": (3, signs_pm())}))
    with pytest.raises(ScenarioMismatchError, match="entries"):
        correlator(ejm_pi4, CorrelatorSpec.of({"B": (0, signs_pm())}))
    with pytest.raises(ScenarioMismatchError, match="unknown party"):
        correlator(ejm_pi4, CorrelatorSpec.of({"D": (0, signs_pm())}))


def test_sign_maps() -> None:
    assert bit_signs(2, 4) == (1.0, 1.0, -1.0, -1.0)
    assert bit_signs(1, 4) == (1.0, -1.0, 1.0, -1.0)
    assert tetra_signs(0) == (1.0, 1.0, -1.0, -1.0)
    # the three bits of every outcome multiply to +1
    prod = np.prod([tetra_signs(y) for y in range(3)], axis=0)
    np.testing.assert_array_equal(prod, np.ones(4))


def test_correlator_spec_json_form() -> None:
    spec = CorrelatorSpec.of({"C": (1, signs_pm()), "A": (0, signs_pm())})
    payload = spec.to_json()

    assert list(payload) == ["A", "C"]
    assert payload["C"] == {"input": 1, "signs": [1, -1]}
    assert CorrelatorSpec.from_json(payload) == spec


def test_mix_with_uniform_halves_correlators(pr_bilocal) -> None:
    noise = uniform_behavior(pr_bilocal.scenario)
    mixed = mix(pr_bilocal, noise, 0.5)
    spec = CorrelatorSpec.of({"A": (1, signs_pm()), "B": (0, bit_signs(1, 4)), "C": (1, signs_pm())})

    assert correlator(mixed, spec) == pytest.approx(0.5 * correlator(pr_bilocal, spec), abs=1e-12)


def test_behavior_json_keeps_data_and_meta() -> None:
    b = ejm_correlations(0.3, 0.8)
    text = behavior_to_json(b, {"theta": 0.3})
    payload = json.loads(text)
    back = behavior_from_json(text)

    assert payload["meta"]["theta"] == 0.3
    assert "version" in payload["meta"]
    assert payload["scenario"]["sources"][0]["nature"] == Nature.QUANTUM.value
    np.testing.assert_array_equal(back.data, b.data)


def test_bilocal_scenario_natures() -> None:
    s = bilocal_scenario(2, 2, 4, (Nature.CLASSICAL, Nature.NO_SIGNALING))

    assert [src.nature for src in s.sources] == [Nature.CLASSICAL, Nature.NO_SIGNALING]
    assert s.with_sources((Nature.QUANTUM, Nature.QUANTUM)).sources[0].nature is Nature.QUANTUM
