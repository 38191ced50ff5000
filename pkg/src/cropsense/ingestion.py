"""Geo-tagged report ingestion: validation, dedupe, ordinals, persistence.

Reports land in an append-only store. Each accepted report gets a
per-agent ordinal k = 1, 2, 3, ... in receipt order; k drives incentive
pricing, so ordinal assignment is atomic and rejected submissions never
consume one. The store serializes to JSONL with a fixed field order so
round-trips are byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
import os
import re
import threading
from dataclasses import dataclass
from datetime import date, datetime, timezone
from enum import Enum
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import IO, Iterable, Iterator, Sequence

from .evaluation import DiagnosisLabel
from .registry import AgentStatus, Registry, UnknownAgent, Zardi

__all__ = [
    "ReportLabel",
    "Report",
    "Capture",
    "AcceptedReport",
    "ReportStore",
    "IngestionService",
    "ReportServer",
    "IngestionError",
    "AgentNotActive",
    "MissingGeotag",
    "InvalidCoordinates",
    "InvalidLabel",
    "DuplicateImage",
    "UnknownReport",
    "StoreLocked",
    "store_lock",
    "load_store",
]


class IngestionError(Exception):
    """Base class for submission and store failures."""


class AgentNotActive(IngestionError):
    """The agent is not Selected or has no device assigned."""


class MissingGeotag(IngestionError):
    """GPS fields are absent — the known handset failure mode."""


class InvalidCoordinates(MissingGeotag):
    """Latitude/longitude outside the valid ranges."""


class InvalidLabel(IngestionError):
    pass


class DuplicateImage(IngestionError):
    """The same agent already uploaded this image."""


class UnknownReport(IngestionError):
    pass


class StoreLocked(IngestionError):
    """Another process holds the store directory lock."""


class ReportLabel(str, Enum):
    """The four micro-task labels an agent can attach to an image."""

    DISEASE = "Disease"
    WHITEFLY = "Whitefly"
    ANOMALY = "Anomaly"
    OTHER = "Other"


def _to_utc(dt: datetime) -> datetime:
    if dt.tzinfo is None:
        return dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def format_timestamp(dt: datetime) -> str:
    """RFC 3339 UTC with a Z suffix; fractional seconds only when present."""
    dt = _to_utc(dt)
    if dt.microsecond:
        return dt.strftime("%Y-%m-%dT%H:%M:%S.%f").rstrip("0") + "Z"
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_timestamp(value: str) -> datetime:
    return _to_utc(datetime.fromisoformat(value.replace("Z", "+00:00")))


@dataclass
class Capture:
    """The client-side fields of one submission."""

    captured_at: datetime
    latitude: float | None
    longitude: float | None
    label: ReportLabel | str
    comment: str = ""
    image_ref: str = ""

    @classmethod
    def from_dict(cls, data: dict) -> "Capture":
        return cls(
            captured_at=parse_timestamp(data["captured_at"]),
            latitude=data.get("latitude"),
            longitude=data.get("longitude"),
            label=data.get("label", ""),
            comment=data.get("comment", ""),
            image_ref=data.get("image_ref", ""),
        )


@dataclass
class Report:
    report_id: str
    agent_id: str
    captured_at: datetime
    received_at: datetime
    latitude: float
    longitude: float
    label: ReportLabel
    comment: str
    image_ref: str
    expert_diagnosis: DiagnosisLabel | None = None

    def to_json(self) -> str:
        payload = {
            "report_id": self.report_id,
            "agent_id": self.agent_id,
            "captured_at": format_timestamp(self.captured_at),
            "received_at": format_timestamp(self.received_at),
            "latitude": self.latitude,
            "longitude": self.longitude,
            "label": self.label.value,
            "comment": self.comment,
            "image_ref": self.image_ref,
            "expert_diagnosis": (
                self.expert_diagnosis.value if self.expert_diagnosis else None
            ),
        }
        return json.dumps(payload, separators=(",", ":"), ensure_ascii=False)

    @classmethod
    def from_json(cls, line: str) -> "Report":
        data = json.loads(line)
        return cls(
            report_id=data["report_id"],
            agent_id=data["agent_id"],
            captured_at=parse_timestamp(data["captured_at"]),
            received_at=parse_timestamp(data["received_at"]),
            latitude=data["latitude"],
            longitude=data["longitude"],
            label=ReportLabel(data["label"]),
            comment=data["comment"],
            image_ref=data["image_ref"],
            expert_diagnosis=(
                DiagnosisLabel(data["expert_diagnosis"])
                if data.get("expert_diagnosis")
                else None
            ),
        )


@dataclass(frozen=True)
class AcceptedReport:
    report_id: str
    ordinal: int


_REPORT_ID_RE = re.compile(r"^rpt-(\d+)$")


class ReportStore:
    """Append-only report log with per-agent ordinal bookkeeping.

    Appends are serialized under one lock (ordinal assignment and duplicate
    detection must be atomic); reads take the same lock briefly to snapshot.
    An optional journal file receives the canonical JSONL line for every
    accepted report, in receipt order.
    """

    def __init__(self) -> None:
        self._reports: list[Report] = []
        self._by_id: dict[str, Report] = {}
        self._ordinals: dict[str, int] = {}
        self._agent_counts: dict[str, int] = {}
        self._agent_images: set[tuple[str, str]] = set()
        self._seq = 0
        self._lock = threading.Lock()
        self._journal: IO[str] | None = None
        self.annotation_audit: list[dict] = []

    def __len__(self) -> int:
        return len(self._reports)

    def __iter__(self) -> Iterator[Report]:
        return iter(self.snapshot())

    def snapshot(self) -> list[Report]:
        with self._lock:
            return list(self._reports)

    def attach_journal(self, fh: IO[str]) -> None:
        self._journal = fh

    def append(self, agent_id: str, capture: Capture, received_at: datetime) -> AcceptedReport:
        """Validate capture fields and persist; atomic per call."""
        if capture.latitude is None or capture.longitude is None:
            raise MissingGeotag(f"agent {agent_id!r}: GPS coordinates absent")
        if not -90.0 <= capture.latitude <= 90.0 or not -180.0 <= capture.longitude <= 180.0:
            raise InvalidCoordinates(
                f"agent {agent_id!r}: coordinates ({capture.latitude}, {capture.longitude}) out of range"
            )
        try:
            label = ReportLabel(capture.label)
        except ValueError:
            raise InvalidLabel(f"agent {agent_id!r}: label {capture.label!r}") from None
        if not capture.image_ref:
            raise IngestionError(f"agent {agent_id!r}: image_ref is required")

        with self._lock:
            key = (agent_id, capture.image_ref)
            if key in self._agent_images:
                raise DuplicateImage(
                    f"agent {agent_id!r} already uploaded image {capture.image_ref!r}"
                )
            self._seq += 1
            ordinal = self._agent_counts.get(agent_id, 0) + 1
            report = Report(
                report_id=f"rpt-{self._seq:08d}",
                agent_id=agent_id,
                captured_at=_to_utc(capture.captured_at),
                received_at=_to_utc(received_at),
                latitude=float(capture.latitude),
                longitude=float(capture.longitude),
                label=label,
                comment=capture.comment or "",
                image_ref=capture.image_ref,
            )
            self._reports.append(report)
            self._by_id[report.report_id] = report
            self._ordinals[report.report_id] = ordinal
            self._agent_counts[agent_id] = ordinal
            self._agent_images.add(key)
            if self._journal is not None:
                self._journal.write(report.to_json() + "\n")
            return AcceptedReport(report_id=report.report_id, ordinal=ordinal)

    def get(self, report_id: str) -> Report:
        report = self._by_id.get(report_id)
        if report is None:
            raise UnknownReport(f"unknown report {report_id!r}")
        return report

    def ordinal(self, report_id: str) -> int:
        self.get(report_id)
        return self._ordinals[report_id]

    def agent_report_count(self, agent_id: str) -> int:
        return self._agent_counts.get(agent_id, 0)

    def reports_for(self, agent_id: str) -> list[Report]:
        return [r for r in self.snapshot() if r.agent_id == agent_id]

    def agent_history(self, agent_id: str) -> list[tuple[int, datetime]]:
        """(ordinal, received_at) pairs in ordinal order, for payout pricing."""
        history = []
        for r in self.snapshot():
            if r.agent_id == agent_id:
                history.append((self._ordinals[r.report_id], r.received_at))
        return history

    def annotate(self, report_id: str, diagnosis: DiagnosisLabel) -> Report:
        """Set the expert diagnosis; re-annotation is recorded in the audit log."""
        with self._lock:
            report = self._by_id.get(report_id)
            if report is None:
                raise UnknownReport(f"unknown report {report_id!r}")
            if report.expert_diagnosis is not None:
                self.annotation_audit.append(
                    {
                        "seq": len(self.annotation_audit) + 1,
                        "report_id": report_id,
                        "old": report.expert_diagnosis.value,
                        "new": diagnosis.value,
                    }
                )
            report.expert_diagnosis = diagnosis
            return report

    def query(
        self,
        agent_id: str | None = None,
        label: ReportLabel | None = None,
        date_range: tuple[date | datetime, date | datetime] | None = None,
        has_expert_diagnosis: bool | None = None,
    ) -> list[Report]:
        """All and only reports matching every supplied predicate, receipt order."""
        lo = hi = None
        if date_range is not None:
            lo, hi = (_as_date(date_range[0]), _as_date(date_range[1]))
        out = []
        for r in self.snapshot():
            if agent_id is not None and r.agent_id != agent_id:
                continue
            if label is not None and r.label is not label:
                continue
            if lo is not None and not lo <= r.received_at.date() <= hi:
                continue
            if has_expert_diagnosis is not None:
                if has_expert_diagnosis != (r.expert_diagnosis is not None):
                    continue
            out.append(r)
        return out

    # -- persistence ---------------------------------------------------------

    def export_jsonl(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for report in self.snapshot():
                fh.write(report.to_json() + "\n")

    @classmethod
    def import_jsonl(cls, path: str | Path) -> "ReportStore":
        store = cls()
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    store._restore(Report.from_json(line))
        return store

    def _restore(self, report: Report) -> None:
        with self._lock:
            if report.report_id in self._by_id:
                raise IngestionError(f"duplicate report_id {report.report_id!r}")
            key = (report.agent_id, report.image_ref)
            if key in self._agent_images:
                raise DuplicateImage(
                    f"agent {report.agent_id!r} image {report.image_ref!r} appears twice"
                )
            self._reports.append(report)
            self._by_id[report.report_id] = report
            ordinal = self._agent_counts.get(report.agent_id, 0) + 1
            self._ordinals[report.report_id] = ordinal
            self._agent_counts[report.agent_id] = ordinal
            self._agent_images.add(key)
            m = _REPORT_ID_RE.match(report.report_id)
            if m:
                self._seq = max(self._seq, int(m.group(1)))
            else:
                self._seq = max(self._seq, len(self._reports))


def _as_date(value: date | datetime) -> date:
    return value.date() if isinstance(value, datetime) else value


class IngestionService:
    """Submission front door: agent checks, then atomic store append."""

    def __init__(self, registry: Registry, store: ReportStore | None = None) -> None:
        self.registry = registry
        self.store = store if store is not None else ReportStore()

    def _active_agent(self, agent_id: str):
        agent = self.registry.get(agent_id)  # raises UnknownAgent
        if agent.status is not AgentStatus.SELECTED:
            raise AgentNotActive(f"agent {agent_id!r} has status {agent.status.value}")
        if not agent.device_id:
            raise AgentNotActive(f"agent {agent_id!r} has no device assigned")
        return agent

    def submit_report(
        self, agent_id: str, capture: Capture, received_at: datetime | None = None
    ) -> AcceptedReport:
        self._active_agent(agent_id)
        when = received_at if received_at is not None else datetime.now(timezone.utc)
        return self.store.append(agent_id, capture, when)

    def submit_batch(
        self,
        agent_id: str,
        captures: Sequence[Capture],
        received_at: datetime | None = None,
    ) -> list[AcceptedReport]:
        """Store-and-forward upload: ordinals follow array order."""
        self._active_agent(agent_id)
        when = received_at if received_at is not None else datetime.now(timezone.utc)
        return [self.store.append(agent_id, capture, when) for capture in captures]

    def query_reports(
        self,
        agent_id: str | None = None,
        region: Zardi | None = None,
        label: ReportLabel | None = None,
        date_range: tuple[date | datetime, date | datetime] | None = None,
        has_expert_diagnosis: bool | None = None,
    ) -> list[Report]:
        reports = self.store.query(
            agent_id=agent_id,
            label=label,
            date_range=date_range,
            has_expert_diagnosis=has_expert_diagnosis,
        )
        if region is not None:
            reports = [
                r for r in reports if self.registry.get(r.agent_id).region is region
            ]
        return reports

    def attach_expert_diagnosis(self, report_id: str, diagnosis: DiagnosisLabel) -> Report:
        return self.store.annotate(report_id, diagnosis)

    def bulk_annotate_csv(self, source: str | Path | io.TextIOBase) -> int:
        """Apply a report_id,diagnosis CSV; returns the number annotated."""
        if isinstance(source, (str, Path)):
            fh = open(source, "r", encoding="utf-8", newline="")
            close = True
        else:
            fh, close = source, False
        try:
            reader = csv.DictReader(fh)
            if reader.fieldnames != ["report_id", "diagnosis"]:
                raise IngestionError(
                    f"expected header report_id,diagnosis, got {reader.fieldnames}"
                )
            n = 0
            for row in reader:
                self.attach_expert_diagnosis(
                    row["report_id"], DiagnosisLabel(row["diagnosis"])
                )
                n += 1
            return n
        finally:
            if close:
                fh.close()


# -- store directory layout and locking --------------------------------------

REPORTS_FILENAME = "reports.jsonl"
LOCK_FILENAME = "store.lock"


class store_lock:
    """Exclusive lock on a store directory; a second holder gets StoreLocked."""

    def __init__(self, store_dir: str | Path) -> None:
        self.path = Path(store_dir) / LOCK_FILENAME
        self._fd: int | None = None

    def acquire(self) -> "store_lock":
        self.path.parent.mkdir(parents=True, exist_ok=True)
        try:
            self._fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise StoreLocked(f"store {self.path.parent} is locked ({self.path})") from None
        os.write(self._fd, str(os.getpid()).encode())
        return self

    def release(self) -> None:
        if self._fd is not None:
            os.close(self._fd)
            self._fd = None
            self.path.unlink(missing_ok=True)

    def __enter__(self) -> "store_lock":
        return self.acquire()

    def __exit__(self, *exc) -> None:
        self.release()


def load_store(store_dir: str | Path) -> ReportStore:
    """Load (or initialise) the report store under a directory."""
    path = Path(store_dir) / REPORTS_FILENAME
    if path.exists():
        return ReportStore.import_jsonl(path)
    return ReportStore()


# -- wire protocol ------------------------------------------------------------

_ERROR_STATUS = {
    "UnknownAgent": 404,
    "UnknownReport": 404,
    "AgentNotActive": 403,
    "DuplicateImage": 409,
}


class _ReportHandler(BaseHTTPRequestHandler):
    service: IngestionService  # set by ReportServer subclassing

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _send(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        if self.path == "/healthz":
            self._send(200, {"status": "ok", "reports": len(self.service.store)})
        else:
            self._send(404, {"error": "NotFound"})

    def do_POST(self):
        if self.path != "/reports":
            self._send(404, {"error": "NotFound"})
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
            data = json.loads(self.rfile.read(length))
        except (ValueError, json.JSONDecodeError):
            self._send(400, {"error": "BadRequest", "detail": "invalid JSON body"})
            return
        try:
            if "captures" in data:
                accepted = self.service.submit_batch(
                    data["agent_id"],
                    [Capture.from_dict(c) for c in data["captures"]],
                )
                self._send(
                    201,
                    {
                        "accepted": [
                            {"report_id": a.report_id, "ordinal": a.ordinal}
                            for a in accepted
                        ]
                    },
                )
            else:
                accepted_one = self.service.submit_report(
                    data["agent_id"], Capture.from_dict(data)
                )
                self._send(
                    201,
                    {"report_id": accepted_one.report_id, "ordinal": accepted_one.ordinal},
                )
        except (IngestionError, UnknownAgent) as exc:
            name = type(exc).__name__
            self._send(_ERROR_STATUS.get(name, 400), {"error": name, "detail": str(exc)})
        except (KeyError, ValueError) as exc:
            self._send(400, {"error": "BadRequest", "detail": str(exc)})


class ReportServer:
    """The ingestion endpoint: one POST /reports route over a locked store.

    Accepted reports are journaled to reports.jsonl as they arrive; a
    graceful shutdown flushes and releases the store lock.
    """

    def __init__(self, registry: Registry, store_dir: str | Path, addr: tuple[str, int]):
        self.store_dir = Path(store_dir)
        self._lock = store_lock(self.store_dir).acquire()
        try:
            store = load_store(self.store_dir)
            self._journal = open(
                self.store_dir / REPORTS_FILENAME, "a", encoding="utf-8"
            )
            store.attach_journal(self._journal)
            self.service = IngestionService(registry, store)
            handler = type("BoundHandler", (_ReportHandler,), {"service": self.service})
            self._httpd = ThreadingHTTPServer(addr, handler)
        except Exception:
            self._lock.release()
            raise

    @property
    def address(self) -> tuple[str, int]:
        return self._httpd.server_address  # type: ignore[return-value]

    def serve_forever(self) -> None:
        try:
            self._httpd.serve_forever()
        finally:
            self.close()

    def shutdown(self) -> None:
        self._httpd.shutdown()

    def close(self) -> None:
        self._httpd.server_close()
        self._journal.flush()
        self._journal.close()
        self._lock.release()
