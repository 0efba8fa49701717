from __future__ import annotations

from pathlib import Path
from typing import Any

from fullnn.core.config import CONFIG_DIR, FullNNConfig
from fullnn.inflation.certify import FullNNReport
from fullnn.inflation.witnesses import CertificateDoc
from fullnn.scan import ScanResult
from fullnn.scenario import BehaviorDoc
from fullnn.utils import write_json
from fullnn.witness import WitnessExprDoc


def ensure_schema_files(workspace: Path) -> list[Path]:
    schema_dir = workspace / CONFIG_DIR / "schemas"
    schema_dir.mkdir(parents=True, exist_ok=True)
    schema_map: dict[str, dict[str, Any]] = {
        "behavior.json": BehaviorDoc.model_json_schema(),
        "witness.json": WitnessExprDoc.model_json_schema(),
        "certificate.json": CertificateDoc.model_json_schema(),
        "full-nn-report.json": FullNNReport.model_json_schema(),
        "scan-result.json": ScanResult.model_json_schema(),
        "config.json": FullNNConfig.model_json_schema(),
    }
    written = []
    for name, schema in schema_map.items():
        path = schema_dir / name
        write_json(path, schema)
        written.append(path)
    return written
