"""Structured report documents for the command-line interface.

JSON is canonical; CSV is a flattened projection for plotting.  The
determinism hash covers the full document minus the timing field, so two
runs with the same invocation and seed must produce identical hashes.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

SCHEMA_VERSION = "1"

__all__ = ["ReportDocument", "to_native", "SCHEMA_VERSION"]


def to_native(obj):
    """Recursively convert numpy scalars/arrays and dataclass-style
    results into JSON-serializable structures."""
    if hasattr(obj, "to_dict"):
        return to_native(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): to_native(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_native(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_native(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, float) and obj != obj:  # NaN
        return None
    return obj


@dataclass
class ReportDocument:
    command: str
    results: dict
    body: dict | None = None
    seed: int | None = None
    n_samples: int | None = None
    workers: int = 1
    timing_ms: int = 0
    version: str = "0.1.0"
    schema_version: str = SCHEMA_VERSION
    csv_rows: list = field(default_factory=list)

    def payload(self) -> dict:
        return {
            "command": self.command,
            "schema_version": self.schema_version,
            "version": self.version,
            "body": to_native(self.body),
            "seed": self.seed,
            "n_samples": self.n_samples,
            "workers": self.workers,
            "results": to_native(self.results),
        }

    def determinism_hash(self) -> str:
        blob = json.dumps(self.payload(), sort_keys=True, separators=(",", ":"))
        return "sha256:" + hashlib.sha256(blob.encode()).hexdigest()

    def to_json(self) -> str:
        doc = self.payload()
        doc["timing_ms"] = int(self.timing_ms)
        doc["determinism_hash"] = self.determinism_hash()
        return json.dumps(doc, sort_keys=True, indent=2)

    def to_csv(self) -> str:
        rows = self.csv_rows or _default_rows(self.results)
        if not rows:
            return ""
        header = list(rows[0].keys())
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(_csv_cell(row.get(k)) for k in header))
        return "\n".join(lines) + "\n"


def _csv_cell(v) -> str:
    v = to_native(v)
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _default_rows(results: dict) -> list[dict]:
    rows = []

    def walk(prefix, node):
        node = to_native(node)
        if isinstance(node, dict):
            if set(node) >= {"estimate", "std_error"}:
                rows.append({"name": prefix, "value": node["estimate"],
                             "std_error": node["std_error"],
                             "n_samples": node.get("n_samples", "")})
                return
            for k, v in node.items():
                walk(f"{prefix}.{k}" if prefix else str(k), v)
        elif isinstance(node, list):
            for i, v in enumerate(node):
                walk(f"{prefix}[{i}]", v)
        else:
            rows.append({"name": prefix, "value": node, "std_error": "", "n_samples": ""})

    walk("", results)
    return rows
