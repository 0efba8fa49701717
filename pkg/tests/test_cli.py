import json
from pathlib import Path

import numpy as np
import pytest

from fullnn.cli import EXIT_AMBIGUOUS, EXIT_INVALID, EXIT_OK, build_parser, main
from fullnn.inflation import CertificateDoc, OrientationReport, Verdict
from fullnn.inflation.certify import FullNNReport
from fullnn.lp import NumericalAmbiguityError, SolveStatus
from fullnn.quantum import ejm_correlations
from fullnn.scenario import behavior_from_json, scenario_to_doc
from fullnn.utils import sha256_array
from fullnn.witness import ejm_witness_c_ns, witness_to_doc


def test_cli_gen_defaults() -> None:
    parser = build_parser()
    args = parser.parse_args(["gen", "ejm", "--theta", "0.5", "--out", "b.json"])
    assert args.command == "gen"
    assert args.kind == "ejm"
    assert args.visibility == 1.0
    assert args.n == 3
    assert args.p_lambda is None
    assert args.verbose is False


def test_cli_certify_defaults() -> None:
    parser = build_parser()
    args = parser.parse_args(["certify", "--behavior", "b.json"])
    assert args.tol is None
    assert args.out is None
    assert args.cert_dir is None
    assert args.parallel is False


def test_cli_scan_defaults() -> None:
    parser = build_parser()
    args = parser.parse_args(["scan", "--what", "sim-visibility", "--out", "s.csv"])
    assert args.theta_min == 0.0
    assert args.theta_max == pytest.approx(np.pi / 2)
    assert args.steps == 40
    assert args.jobs is None


def test_cli_rejects_unknown_generator() -> None:
    with pytest.raises(SystemExit):
        build_parser().parse_args(["gen", "ghz", "--out", "b.json"])


def test_gen_ejm_writes_behavior(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    out = tmp_path / "ejm.json"

    code = main(["gen", "ejm", "--theta", "0.7853981633974483", "--visibility", "0.9", "--out", str(out)])

    assert code == EXIT_OK
    b = behavior_from_json(out.read_text(encoding="utf-8"))
    np.testing.assert_allclose(b.data, ejm_correlations(np.pi / 4, 0.9).data, atol=1e-15)
    assert f"sha256={sha256_array(b.data)}" in capsys.readouterr().out
    meta = json.loads(out.read_text(encoding="utf-8"))["meta"]
    assert meta["generator"] == "ejm"
    assert meta["visibility"] == 0.9


def test_gen_ejm_needs_theta(tmp_path: Path) -> None:
    assert main(["gen", "ejm", "--out", str(tmp_path / "b.json")]) == EXIT_INVALID


def test_gen_rejects_bad_visibility(tmp_path: Path) -> None:
    code = main(["gen", "bsm-protocol", "--visibility", "1.5", "--out", str(tmp_path / "b.json")])
    assert code == EXIT_INVALID


def test_gen_tetra_needs_four_weights(tmp_path: Path) -> None:
    code = main(["gen", "tetra", "--p-lambda", "0.5", "0.5", "--out", str(tmp_path / "b.json")])
    assert code == EXIT_INVALID


def test_gen_ejm_rejects_theta_out_of_range(tmp_path: Path) -> None:
    assert main(["gen", "ejm", "--theta", "2.0", "--out", str(tmp_path / "b.json")]) == EXIT_INVALID


def test_gen_ejm_theta0_matches_simulation(tmp_path: Path) -> None:
    ejm, sim = tmp_path / "ejm.json", tmp_path / "sim.json"
    assert main(["gen", "ejm", "--theta", "0", "--visibility", "1", "--out", str(ejm)]) == EXIT_OK
    assert main(["gen", "sim-theta0", "--out", str(sim)]) == EXIT_OK

    left = behavior_from_json(ejm.read_text(encoding="utf-8"))
    right = behavior_from_json(sim.read_text(encoding="utf-8"))
    np.testing.assert_allclose(left.data, right.data, atol=1e-12)


def test_witness_s3_on_pr_star_saturates(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    behavior = tmp_path / "star.json"
    assert main(["gen", "pr-star", "--n", "3", "--out", str(behavior)]) == EXIT_OK
    report = tmp_path / "report.json"

    code = main(["witness", "--behavior", str(behavior), "--which", "s3", "--out", str(report)])

    assert code == EXIT_OK
    assert "not witnessed" in capsys.readouterr().out
    entry = json.loads(report.read_text(encoding="utf-8"))["results"][0]
    assert entry["value"] == pytest.approx(2 ** (1 / 3), abs=1e-12)
    assert entry["bound"] == pytest.approx(2 ** (1 / 3))
    assert entry["local_violated"] is True


def test_cert2witness_rejects_empty_certificate(tmp_path: Path, pr_bilocal) -> None:
    doc = CertificateDoc(
        orientation="bob-charlie", scenario=scenario_to_doc(pr_bilocal.scenario), multipliers={}
    )
    path = tmp_path / "certificate.json"
    path.write_text(doc.model_dump_json(), encoding="utf-8")

    assert main(["cert2witness", "--certificate", str(path), "--out", str(tmp_path / "w.json")]) == EXIT_INVALID


def test_witness_s2_on_pr_strategy(
    tmp_path: Path, pr_bilocal, write_behavior, capsys: pytest.CaptureFixture[str]
) -> None:
    path = write_behavior(pr_bilocal)
    report = tmp_path / "report.json"

    code = main(["witness", "--behavior", str(path), "--which", "s2", "--out", str(report)])

    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "not witnessed" in out
    assert "full-NN bound 1.41421356237" in out
    assert "network-local bound 1 violated" in out
    payload = json.loads(report.read_text(encoding="utf-8"))
    assert payload["results"][0]["bound"] is None
    assert payload["results"][2]["value"] == pytest.approx(np.sqrt(2))
    s2_entry = payload["results"][2]
    assert s2_entry["bound"] == pytest.approx(np.sqrt(2))
    assert s2_entry["local_bound"] == 1.0
    assert s2_entry["local_violated"] is True
    assert s2_entry["violated"] is False
    assert "local_bound" not in payload["results"][0]


def test_witness_ejm_on_pi4(ejm_pi4, write_behavior, capsys: pytest.CaptureFixture[str]) -> None:
    code = main(["witness", "--behavior", str(write_behavior(ejm_pi4)), "--which", "ejm"])

    assert code == EXIT_OK
    assert "full NN witnessed" in capsys.readouterr().out


@pytest.mark.parametrize(
    ("gen_args", "which"),
    [
        (["star-quantum", "--n", "3"], "s3"),
        (["bsm-protocol"], "bsm"),
    ],
)
def test_witness_on_quantum_protocols(
    tmp_path: Path, gen_args: list[str], which: str, capsys: pytest.CaptureFixture[str]
) -> None:
    behavior = tmp_path / "b.json"
    assert main(["gen", *gen_args, "--out", str(behavior)]) == EXIT_OK

    code = main(["witness", "--behavior", str(behavior), "--which", which])

    assert code == EXIT_OK
    assert "full NN witnessed" in capsys.readouterr().out


def test_witness_expr_from_file(tmp_path: Path, ejm_pi4, write_behavior) -> None:
    expr = tmp_path / "expr.json"
    expr.write_text(witness_to_doc(ejm_witness_c_ns()).model_dump_json(), encoding="utf-8")
    report = tmp_path / "report.json"

    code = main([
        "witness", "--behavior", str(write_behavior(ejm_pi4)),
        "--which", "expr", "--expr", str(expr), "--out", str(report),
    ])

    assert code == EXIT_OK
    payload = json.loads(report.read_text(encoding="utf-8"))
    assert payload["verdict"] == "full NN witnessed"
    assert payload["results"][0]["name"] == "ejm-c-ns"


def test_witness_expr_needs_file(ejm_pi4, write_behavior) -> None:
    assert main(["witness", "--behavior", str(write_behavior(ejm_pi4)), "--which", "expr"]) == EXIT_INVALID


def test_witness_missing_behavior(tmp_path: Path) -> None:
    assert main(["witness", "--behavior", str(tmp_path / "none.json"), "--which", "s2"]) == EXIT_INVALID


def test_init_writes_config_and_schemas(workspace: Path) -> None:
    assert main(["init", "--workspace", str(workspace)]) == EXIT_OK

    assert (workspace / ".fullnn" / "config.yaml").exists()
    schemas = sorted(p.name for p in (workspace / ".fullnn" / "schemas").iterdir())
    assert schemas == [
        "behavior.json",
        "certificate.json",
        "config.json",
        "full-nn-report.json",
        "scan-result.json",
        "witness.json",
    ]


def _report(verdict: Verdict, status: SolveStatus, pr_bilocal) -> FullNNReport:
    return FullNNReport(
        behavior_sha256=sha256_array(pr_bilocal.data),
        scenario=scenario_to_doc(pr_bilocal.scenario),
        orientations=[OrientationReport(orientation="alice-bob", status=status)],
        verdict=verdict,
    )


def test_certify_ambiguous_exit_code(mocker, tmp_path: Path, pr_bilocal, write_behavior) -> None:
    mocker.patch(
        "fullnn.cli.certify_full_nn",
        return_value=_report(Verdict.AMBIGUOUS, SolveStatus.AMBIGUOUS, pr_bilocal),
    )
    out = tmp_path / "report.json"

    code = main(["certify", "--behavior", str(write_behavior(pr_bilocal)), "--out", str(out)])

    assert code == EXIT_AMBIGUOUS
    assert json.loads(out.read_text(encoding="utf-8"))["verdict"] == "ambiguous"


def test_certify_numerical_failure_exit_code(mocker, pr_bilocal, write_behavior) -> None:
    mocker.patch("fullnn.cli.certify_full_nn", side_effect=NumericalAmbiguityError("stalled"))

    assert main(["certify", "--behavior", str(write_behavior(pr_bilocal))]) == EXIT_AMBIGUOUS


def test_certify_passes_tolerance(mocker, pr_bilocal, write_behavior) -> None:
    certify = mocker.patch(
        "fullnn.cli.certify_full_nn",
        return_value=_report(Verdict.NOT_CERTIFIED, SolveStatus.FEASIBLE, pr_bilocal),
    )

    code = main(["certify", "--behavior", str(write_behavior(pr_bilocal)), "--tol", "1e-6"])

    assert code == EXIT_OK
    config = certify.call_args.args[1]
    assert config.tolerance.feasibility == 1e-6


def test_certify_rejects_non_positive_tolerance(pr_bilocal, write_behavior) -> None:
    code = main(["certify", "--behavior", str(write_behavior(pr_bilocal)), "--tol", "0"])
    assert code == EXIT_INVALID


def test_dump_lp(tmp_path: Path, pr_bilocal, write_behavior) -> None:
    out = tmp_path / "lp.txt"

    code = main(["dump-lp", "--behavior", str(write_behavior(pr_bilocal)), "--side", "alice-bob", "--out", str(out)])

    assert code == EXIT_OK
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "fullnn-lp 1 inflation-alice-bob"
    assert lines[1] == "vars 1024"


def test_cert2witness_rejects_invalid_multipliers(tmp_path: Path, pr_bilocal) -> None:
    doc = CertificateDoc(
        orientation="alice-bob",
        scenario=scenario_to_doc(pr_bilocal.scenario),
        multipliers={"norm[0,0,0]": 1.0},
    )
    path = tmp_path / "certificate.json"
    path.write_text(doc.model_dump_json(), encoding="utf-8")

    code = main(["cert2witness", "--certificate", str(path), "--out", str(tmp_path / "w.json")])

    assert code == EXIT_INVALID


def test_scan_witness_threshold(tmp_path: Path) -> None:
    out = tmp_path / "threshold.csv"

    code = main(["scan", "--what", "witness-threshold", "--steps", "2", "--out", str(out)])

    assert code == EXIT_OK
    assert len(out.read_text(encoding="utf-8").splitlines()) == 4
    assert out.with_suffix(".json").exists()


@pytest.mark.integration
@pytest.mark.slow
@pytest.mark.timeout(300)
def test_certify_then_cert2witness(tmp_path: Path, ejm_pi4, write_behavior, capsys) -> None:
    behavior = write_behavior(ejm_pi4)
    certs = tmp_path / "certs"

    assert main(["certify", "--behavior", str(behavior), "--cert-dir", str(certs)]) == EXIT_OK
    assert "full-NN certified" in capsys.readouterr().out

    witness = tmp_path / "witness.json"
    code = main([
        "cert2witness", "--certificate", str(certs / "certificate-bob-charlie.json"),
        "--out", str(witness), "--behavior", str(behavior),
    ])

    assert code == EXIT_OK
    payload = json.loads(witness.read_text(encoding="utf-8"))
    assert payload["bound"] == 0.0
    assert payload["dir"] == "le"
    assert "witness value" in capsys.readouterr().out
