from __future__ import annotations

import argparse
import logging
from collections.abc import Callable
from pathlib import Path
from typing import Any

import numpy as np
from rich.console import Console
from rich.logging import RichHandler

from fullnn import __version__
from fullnn.artifacts import ensure_schema_files
from fullnn.core.config import FullNNConfig, ensure_default_config, load_config
from fullnn.inflation.bilocal import ClassicalSide, build_bilocal_inflation_lp, compile_inflation
from fullnn.inflation.certify import Verdict, certify_full_nn
from fullnn.inflation.simulation import NonMonotoneFeasibilityError
from fullnn.inflation.witnesses import (
    CertificateDoc,
    certificate_from_doc,
    certificate_to_witness,
    certificate_value,
    check_certificate_scenario,
)
from fullnn.lp.engine import dump_lp
from fullnn.lp.models import NumericalAmbiguityError
from fullnn.quantum import bsm_protocol_behavior, ejm_correlations, star_quantum_behavior
from fullnn.scan import ScanGrid, ScanKind, run_scan, write_scan
from fullnn.scenario import Behavior, behavior_from_json, behavior_to_json
from fullnn.strategies import (
    bilocal_pr_family,
    bilocal_pr_strategy,
    simulate_theta0,
    simulate_theta_pi2,
    star_single_pr_strategy,
    three_star_tetra_strategy,
)
from fullnn.utils import read_json, sha256_array, write_json, write_text
from fullnn.witness import (
    WitnessExprDoc,
    bilocal_I,
    bsm_witness_exprs,
    ejm_witness_c_ns,
    ejm_witness_ns_c,
    eval_witness,
    full_nn_bound_s3,
    full_nn_bound_s4,
    network_local_bound,
    s2,
    sn,
    witness_from_doc,
    witness_to_doc,
)

console = Console()
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_AMBIGUOUS = 3

GEN_KINDS = (
    "ejm",
    "pr-bilocal",
    "pr-family",
    "pr-star",
    "tetra",
    "star-quantum",
    "sim-theta0",
    "sim-theta-pi2",
    "bsm-protocol",
)
WITNESS_KINDS = ("s2", "s3", "s4", "ejm", "bsm", "expr")


def _workspace(path: str | None) -> Path:
    return Path(path).resolve() if path else Path.cwd()


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def _config(args: argparse.Namespace) -> FullNNConfig:
    config = load_config(_workspace(args.workspace))
    tol = getattr(args, "tol", None)
    if tol is not None and args.command == "certify":
        if not tol > 0:
            raise ValueError("--tol must be positive")
        config.tolerance.feasibility = tol
    return config


def _load_behavior(path: str) -> Behavior:
    return behavior_from_json(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# gen
# ---------------------------------------------------------------------------


def _require(value: Any, flag: str, kind: str) -> Any:
    if value is None:
        raise ValueError(f"gen {kind} needs {flag}")
    return value


def _generate(args: argparse.Namespace) -> tuple[Behavior, dict[str, Any]]:
    kind = args.kind
    v = args.visibility
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"--visibility must lie in [0, 1], got {v}")
    builders: dict[str, Callable[[], tuple[Behavior, dict[str, Any]]]] = {
        "ejm": lambda: (
            ejm_correlations(_require(args.theta, "--theta", kind), v),
            {"theta": args.theta, "visibility": v},
        ),
        "pr-bilocal": lambda: (bilocal_pr_strategy(), {}),
        "pr-family": lambda: (
            bilocal_pr_family(_single_p_lambda(args.p_lambda)),
            {"p_lambda": args.p_lambda},
        ),
        "pr-star": lambda: (star_single_pr_strategy(args.n), {"n": args.n}),
        "tetra": lambda: (
            three_star_tetra_strategy(_require(args.p_lambda, "--p-lambda", kind)),
            {"p_lambda": args.p_lambda},
        ),
        "star-quantum": lambda: (star_quantum_behavior(args.n, v), {"n": args.n, "visibility": v}),
        "sim-theta0": lambda: (simulate_theta0(), {}),
        "sim-theta-pi2": lambda: (simulate_theta_pi2(), {}),
        "bsm-protocol": lambda: (bsm_protocol_behavior(v), {"visibility": v}),
    }
    behavior, params = builders[kind]()
    return behavior, {"generator": kind, **params}


def _single_p_lambda(values: list[float] | None) -> float:
    if values is None:
        return 0.5
    if len(values) != 1:
        raise ValueError("gen pr-family takes a single --p-lambda value")
    return values[0]


def cmd_gen(args: argparse.Namespace) -> int:
    behavior, meta = _generate(args)
    out = Path(args.out)
    write_text(out, behavior_to_json(behavior, meta))
    checksum = sha256_array(behavior.data)
    console.print(f"wrote {out} ({behavior.data.size} entries)")
    console.print(f"sha256={checksum}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# witness
# ---------------------------------------------------------------------------


def _entry(
    name: str, value: float, bound: float, violated: bool, local_bound: float | None = None
) -> dict[str, Any]:
    entry: dict[str, Any] = {"name": name, "value": value, "bound": bound, "violated": violated}
    if local_bound is not None:
        entry["local_bound"] = local_bound
        entry["local_violated"] = value > local_bound + 1e-9
    return entry


def _witness_entries(args: argparse.Namespace, b: Behavior) -> list[dict[str, Any]]:
    which = args.which
    if which == "s2":
        value = s2(b)
        bound = float(np.sqrt(2))
        return [
            _entry("I0", bilocal_I(b, 0), float("nan"), False),
            _entry("I1", bilocal_I(b, 1), float("nan"), False),
            _entry("S2", value, bound, value > bound + 1e-9, network_local_bound()),
        ]
    if which in ("s3", "s4"):
        n = int(which[1])
        value = sn(b, n)
        bound = full_nn_bound_s3() if n == 3 else full_nn_bound_s4()
        return [_entry(which.upper(), value, bound, value > bound + 1e-9, network_local_bound())]
    if which == "ejm":
        exprs = [ejm_witness_c_ns(), ejm_witness_ns_c()]
    elif which == "bsm":
        exprs = list(bsm_witness_exprs())
    else:
        if not args.expr:
            raise ValueError("--which expr needs --expr FILE")
        doc = WitnessExprDoc.model_validate(read_json(Path(args.expr)))
        exprs = [witness_from_doc(doc)]
    results = [eval_witness(w, b) for w in exprs]
    return [_entry(r.name, r.value, r.bound, r.violated) for r in results]


def cmd_witness(args: argparse.Namespace) -> int:
    b = _load_behavior(args.behavior)
    entries = _witness_entries(args, b)
    scored = [e for e in entries if not np.isnan(e["bound"])]
    witnessed = bool(scored) and all(e["violated"] for e in scored)
    verdict = "full NN witnessed" if witnessed else "not witnessed"
    for e in entries:
        if np.isnan(e["bound"]):
            console.print(f"{e['name']} = {e['value']:.12g}")
        else:
            flag = "[red]violated[/red]" if e["violated"] else "not violated"
            console.print(f"{e['name']} = {e['value']:.12g} (full-NN bound {e['bound']:.12g}) {flag}")
            if "local_bound" in e:
                local = "[red]violated[/red]" if e["local_violated"] else "not violated"
                console.print(f"  network-local bound {e['local_bound']:.12g} {local}")
    console.print(f"[bold]{verdict}[/bold]")
    report = {
        "version": __version__,
        "behavior": str(args.behavior),
        "which": args.which,
        "results": [
            {**e, "bound": None if np.isnan(e["bound"]) else e["bound"]} for e in entries
        ],
        "verdict": verdict,
    }
    if args.out:
        write_json(Path(args.out), report)
    return EXIT_OK


# ---------------------------------------------------------------------------
# certify / cert2witness / dump-lp
# ---------------------------------------------------------------------------


def cmd_certify(args: argparse.Namespace) -> int:
    config = _config(args)
    b = _load_behavior(args.behavior)
    report = certify_full_nn(b, config, parallel=args.parallel)
    for o in report.orientations:
        extra = f" y.b(p)={o.certificate_value:.6e}" if o.certificate_value is not None else ""
        console.print(f"{o.orientation.value} classical: {o.status.value}{extra}")
    console.print(f"[bold]{report.verdict.value}[/bold]")
    if args.out:
        write_json(Path(args.out), report.model_dump(mode="json"))
    if args.cert_dir:
        for o in report.orientations:
            if o.certificate is not None:
                path = Path(args.cert_dir) / f"certificate-{o.orientation.value}.json"
                write_json(path, o.certificate.model_dump(mode="json"))
                console.print(f"wrote {path}")
    return EXIT_AMBIGUOUS if report.verdict is Verdict.AMBIGUOUS else EXIT_OK


def cmd_cert2witness(args: argparse.Namespace) -> int:
    config = _config(args)
    doc = CertificateDoc.model_validate(read_json(Path(args.certificate)))
    cert, spec = certificate_from_doc(doc)
    witness = certificate_to_witness(cert, spec, config)
    write_json(Path(args.out), witness_to_doc(witness).model_dump(mode="json"))
    console.print(f"wrote {args.out} ({len(witness.terms)} terms)")
    if args.behavior:
        b = _load_behavior(args.behavior)
        check_certificate_scenario(doc, b)
        result = eval_witness(witness, b)
        direct = certificate_value(compile_inflation(spec), cert, b)
        console.print(f"witness value {result.value:.12g}, y.b(p) {direct:.12g}")
    return EXIT_OK


def cmd_dump_lp(args: argparse.Namespace) -> int:
    config = _config(args)
    b = _load_behavior(args.behavior)
    lp = build_bilocal_inflation_lp(b, ClassicalSide(args.side), config)
    write_text(Path(args.out), dump_lp(lp))
    console.print(f"wrote {args.out} ({lp.n_rows} rows, {lp.n_vars} variables)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# scan / init
# ---------------------------------------------------------------------------


def cmd_scan(args: argparse.Namespace) -> int:
    config = _config(args)
    grid = ScanGrid(theta_min=args.theta_min, theta_max=args.theta_max, steps=args.steps)
    result = run_scan(
        ScanKind(args.what),
        grid,
        tol=args.tol,
        visibility=args.visibility,
        jobs=args.jobs,
        config=config,
    )
    meta = write_scan(result, Path(args.out))
    console.print(f"wrote {args.out} and {meta} ({len(result.rows)} rows)")
    if result.kind is not ScanKind.CERTIFY_GRID and result.rows:
        low = result.minimum()
        console.print(f"minimum {low.value:.6g} at theta={low.theta:.6g}")
    return EXIT_OK


def cmd_init(args: argparse.Namespace) -> int:
    workspace = _workspace(args.workspace)
    ensure_default_config(workspace)
    written = ensure_schema_files(workspace)
    console.print(f"initialized {workspace / '.fullnn'} ({len(written)} schemas)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--workspace", default=None, help="Directory holding .fullnn/config.yaml")
    common.add_argument("--verbose", action="store_true", help="Log LP progress at DEBUG level")

    parser = argparse.ArgumentParser(
        prog="fullnn", description="Full network nonlocality toolkit"
    )
    parser.add_argument("--version", action="version", version=f"fullnn {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("init", parents=[common], help="Write the default config and JSON schemas")

    gen = sub.add_parser("gen", parents=[common], help="Generate a behavior file")
    gen.add_argument("kind", choices=GEN_KINDS)
    gen.add_argument("--theta", type=float, default=None, help="EJM parameter in [0, pi/2]")
    gen.add_argument("--visibility", type=float, default=1.0)
    gen.add_argument("--n", type=int, default=3, help="Number of star branches")
    gen.add_argument("--p-lambda", type=float, nargs="+", default=None)
    gen.add_argument("--out", required=True)

    witness = sub.add_parser("witness", parents=[common], help="Evaluate network witnesses")
    witness.add_argument("--behavior", required=True)
    witness.add_argument("--which", choices=WITNESS_KINDS, required=True)
    witness.add_argument("--expr", default=None, help="WitnessExpr JSON for --which expr")
    witness.add_argument("--out", default=None, help="Machine-readable JSON report")

    certify = sub.add_parser("certify", parents=[common], help="Inflation certificate of full NN")
    certify.add_argument("--behavior", required=True)
    certify.add_argument("--tol", type=float, default=None, help="Feasibility tolerance")
    certify.add_argument("--out", default=None, help="FullNNReport JSON")
    certify.add_argument("--cert-dir", default=None, help="Directory for certificate files")
    certify.add_argument("--parallel", action="store_true", help="Solve both orientations at once")

    scan = sub.add_parser("scan", parents=[common], help="Sweep theta and write a CSV")
    scan.add_argument("--what", choices=[k.value for k in ScanKind], required=True)
    scan.add_argument("--theta-min", type=float, default=0.0)
    scan.add_argument("--theta-max", type=float, default=float(np.pi / 2))
    scan.add_argument("--steps", type=int, default=40)
    scan.add_argument("--tol", type=float, default=None, help="Bisection width")
    scan.add_argument("--visibility", type=float, default=None, help="v for certify-grid")
    scan.add_argument("--jobs", type=int, default=None)
    scan.add_argument("--out", required=True)

    c2w = sub.add_parser("cert2witness", parents=[common], help="Turn a certificate into a witness")
    c2w.add_argument("--certificate", required=True)
    c2w.add_argument("--out", required=True)
    c2w.add_argument("--behavior", default=None, help="Evaluate the witness on this behavior")

    dump = sub.add_parser("dump-lp", parents=[common], help="Write an inflation LP as text")
    dump.add_argument("--behavior", required=True)
    dump.add_argument("--side", choices=[s.value for s in ClassicalSide], required=True)
    dump.add_argument("--out", required=True)

    return parser


COMMANDS: dict[str, Callable[[argparse.Namespace], int]] = {
    "init": cmd_init,
    "gen": cmd_gen,
    "witness": cmd_witness,
    "certify": cmd_certify,
    "scan": cmd_scan,
    "cert2witness": cmd_cert2witness,
    "dump-lp": cmd_dump_lp,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)
    try:
        return COMMANDS[args.command](args)
    except (NumericalAmbiguityError, NonMonotoneFeasibilityError) as exc:
        console.print(f"[red]numerical ambiguity: {exc}[/red]")
        return EXIT_AMBIGUOUS
    except (ValueError, OSError) as exc:
        console.print(f"[red]error: {exc}[/red]")
        return EXIT_INVALID
