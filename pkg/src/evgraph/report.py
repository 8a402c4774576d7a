"""Analysis report schema: strict, versioned, byte-stable JSON.

The report is the contract between the analysis side (CLI, pipeline
sinks) and its consumers (renderer overlays, sentinel /view, web UI),
so parsing is strict: unknown fields, wrong types, and bad enum values
all raise SchemaViolation naming the offending JSON path.  Serialization
fixes key order so identical reports serialize to identical bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any

from .failures import ANOMALY_KINDS, SEVERITY_ERROR, SEVERITY_WARNING, Anomaly
from .model import Coord
from .patterns import Irregularity, PatternOccurrence, PatternRun

__all__ = [
    "SCHEMA_VERSION",
    "SchemaViolation",
    "AnalysisReport",
    "serialize_report",
    "parse_report",
]

SCHEMA_VERSION = 1


class SchemaViolation(Exception):
    def __init__(self, message: str, path: str):
        self.path = path
        super().__init__(f"{path}: {message}")


@dataclass(frozen=True)
class AnalysisReport:
    process_count: int
    event_count: int
    relation_count: int
    anomalies: tuple[Anomaly, ...] = ()
    runs: tuple[PatternRun, ...] = ()
    pending_sends: tuple[Coord, ...] = ()
    pending_receives: tuple[Coord, ...] = ()
    schema_version: int = SCHEMA_VERSION

    @property
    def anomaly_count(self) -> int:
        return len(self.anomalies)


def serialize_report(report: AnalysisReport) -> str:
    doc = {
        "schema_version": report.schema_version,
        "trace": {
            "process_count": report.process_count,
            "event_count": report.event_count,
            "relation_count": report.relation_count,
        },
        "anomalies": [
            {
                "kind": a.kind,
                "events": [list(c) for c in a.events],
                "details": {k: a.details[k] for k in sorted(a.details)},
                "severity": a.severity,
            }
            for a in report.anomalies
        ],
        "runs": [
            {
                "template": run.template,
                "binding": list(run.binding),
                "stride": run.stride,
                "occurrences": [
                    {"base": list(o.base_index), "events": [list(c) for c in o.events]}
                    for o in run.occurrences
                ],
                "irregularities": [
                    {
                        "expected_base": list(irr.expected_base),
                        "reason": irr.reason,
                        "anomalies": list(irr.anomaly_indexes),
                    }
                    for irr in run.irregularities
                ],
            }
            for run in report.runs
        ],
        "pendings": {
            "sends": [list(c) for c in report.pending_sends],
            "receives": [list(c) for c in report.pending_receives],
        },
    }
    return json.dumps(doc, separators=(",", ":"))


def parse_report(text: str) -> AnalysisReport:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"not valid JSON: {exc}", "$") from exc

    root = _obj(doc, "$", {"schema_version", "trace", "anomalies", "runs", "pendings"})
    version = _int(root.get("schema_version"), "$.schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaViolation(f"unsupported schema_version {version}", "$.schema_version")

    trace = _obj(root.get("trace"), "$.trace", {"process_count", "event_count", "relation_count"})
    process_count = _int(trace.get("process_count"), "$.trace.process_count", minimum=0)
    event_count = _int(trace.get("event_count"), "$.trace.event_count", minimum=0)
    relation_count = _int(trace.get("relation_count"), "$.trace.relation_count", minimum=0)

    anomalies = tuple(
        _parse_anomaly(item, f"$.anomalies[{i}]")
        for i, item in enumerate(_list(root.get("anomalies"), "$.anomalies"))
    )
    runs = tuple(
        _parse_run(item, f"$.runs[{i}]")
        for i, item in enumerate(_list(root.get("runs"), "$.runs"))
    )
    pendings = _obj(root.get("pendings"), "$.pendings", {"sends", "receives"})
    pending_sends = _coords(pendings.get("sends"), "$.pendings.sends")
    pending_receives = _coords(pendings.get("receives"), "$.pendings.receives")

    return AnalysisReport(
        process_count=process_count,
        event_count=event_count,
        relation_count=relation_count,
        anomalies=anomalies,
        runs=runs,
        pending_sends=pending_sends,
        pending_receives=pending_receives,
        schema_version=version,
    )


def _parse_anomaly(doc: Any, path: str) -> Anomaly:
    obj = _obj(doc, path, {"kind", "events", "details", "severity"})
    kind = _str(obj.get("kind"), f"{path}.kind")
    if kind not in ANOMALY_KINDS:
        raise SchemaViolation(f"unknown anomaly kind {kind!r}", f"{path}.kind")
    severity = _str(obj.get("severity"), f"{path}.severity")
    if severity not in (SEVERITY_WARNING, SEVERITY_ERROR):
        raise SchemaViolation(f"unknown severity {severity!r}", f"{path}.severity")
    events = _coords(obj.get("events"), f"{path}.events")
    details_obj = obj.get("details")
    if not isinstance(details_obj, dict):
        raise SchemaViolation("expected an object", f"{path}.details")
    for key, value in details_obj.items():
        if isinstance(value, bool) or not isinstance(value, (int, float, str)):
            raise SchemaViolation("values must be numbers or strings", f"{path}.details.{key}")
    try:
        return Anomaly(kind=kind, events=events, details=details_obj, severity=severity)
    except ValueError as exc:
        raise SchemaViolation(str(exc), path) from exc


def _parse_run(doc: Any, path: str) -> PatternRun:
    obj = _obj(doc, path, {"template", "binding", "stride", "occurrences", "irregularities"})
    template = _str(obj.get("template"), f"{path}.template")
    binding = _ints(obj.get("binding"), f"{path}.binding")
    stride = _int(obj.get("stride"), f"{path}.stride", minimum=1)
    occurrences = []
    for i, occ in enumerate(_list(obj.get("occurrences"), f"{path}.occurrences")):
        occ_path = f"{path}.occurrences[{i}]"
        occ_obj = _obj(occ, occ_path, {"base", "events"})
        occurrences.append(
            PatternOccurrence(
                template=template,
                binding=binding,
                base_index=_ints(occ_obj.get("base"), f"{occ_path}.base"),
                events=_coords(occ_obj.get("events"), f"{occ_path}.events"),
            )
        )
    irregularities = []
    for i, irr in enumerate(_list(obj.get("irregularities"), f"{path}.irregularities")):
        irr_path = f"{path}.irregularities[{i}]"
        irr_obj = _obj(irr, irr_path, {"expected_base", "reason", "anomalies"})
        reason = _str(irr_obj.get("reason"), f"{irr_path}.reason")
        if reason not in ("missing", "perturbed"):
            raise SchemaViolation(f"unknown reason {reason!r}", f"{irr_path}.reason")
        irregularities.append(
            Irregularity(
                expected_base=_ints(irr_obj.get("expected_base"), f"{irr_path}.expected_base"),
                reason=reason,
                anomaly_indexes=_ints(irr_obj.get("anomalies"), f"{irr_path}.anomalies"),
            )
        )
    return PatternRun(
        template=template,
        binding=binding,
        occurrences=tuple(occurrences),
        stride=stride,
        irregularities=tuple(irregularities),
    )


def _obj(value: Any, path: str, allowed: set[str]) -> dict:
    if not isinstance(value, dict):
        raise SchemaViolation("expected an object", path)
    unknown = set(value) - allowed
    if unknown:
        raise SchemaViolation(f"unknown field {sorted(unknown)[0]!r}", f"{path}.{sorted(unknown)[0]}")
    missing = allowed - set(value)
    if missing:
        raise SchemaViolation(f"missing field {sorted(missing)[0]!r}", path)
    return value


def _list(value: Any, path: str) -> list:
    if not isinstance(value, list):
        raise SchemaViolation("expected an array", path)
    return value


def _int(value: Any, path: str, minimum: int | None = None) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise SchemaViolation("expected an integer", path)
    if minimum is not None and value < minimum:
        raise SchemaViolation(f"must be >= {minimum}", path)
    return value


def _str(value: Any, path: str) -> str:
    if not isinstance(value, str):
        raise SchemaViolation("expected a string", path)
    return value


def _ints(value: Any, path: str) -> tuple[int, ...]:
    return tuple(_int(v, f"{path}[{i}]") for i, v in enumerate(_list(value, path)))


def _coords(value: Any, path: str) -> tuple[Coord, ...]:
    coords = []
    for i, item in enumerate(_list(value, path)):
        pair = _ints(item, f"{path}[{i}]")
        if len(pair) != 2:
            raise SchemaViolation("expected a [process, index] pair", f"{path}[{i}]")
        coords.append((pair[0], pair[1]))
    return tuple(coords)
