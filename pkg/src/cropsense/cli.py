"""Command-line entry point for the campaign platform.

Batch subcommands wrap the library modules one-to-one; `serve` is the
only long-lived process. All outputs land under --out with fixed
filenames so runs on identical inputs are byte-for-byte reproducible.

Exit codes: 0 success, 1 runtime error, 2 input validation error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import shutil
import signal
import sys
from dataclasses import dataclass
from datetime import date
from enum import Enum
from importlib import resources
from pathlib import Path

from . import analytics, evaluation, fixtures, simulator
from .incentives import (
    IncentiveError,
    PayoutLedger,
    SimulatedPayoutClient,
    compute_payout,
    load_scheme_file,
)
from .ingestion import (
    IngestionError,
    IngestionService,
    ReportServer,
    StoreLocked,
    load_store,
)
from .registry import (
    AgentStatus,
    Gender,
    MalformedProfile,
    QuotaConflict,
    Registry,
    RegistryError,
    allocate_devices,
    read_candidates_csv,
    read_quotas_json,
    verify_roster,
    write_candidates_csv,
    write_quotas_json,
)

STORE_ENV_VAR = "CROPSENSE_STORE"
ROSTER_FILENAME = "roster.jsonl"
ISSUES_FILENAME = "issues.jsonl"


class IssueCategory(str, Enum):
    TECHNICAL = "Technical"
    NETWORK = "Network"
    SOCIAL = "Social"
    SCHEDULE = "Schedule"
    PHONE_USE = "PhoneUse"
    OTHER = "Other"


@dataclass
class IssueLogEntry:
    agent_id: str
    week: int
    category: IssueCategory
    note: str
    escalated_to_engineering: bool = False

    def to_json(self) -> str:
        return json.dumps(
            {
                "agent_id": self.agent_id,
                "week": self.week,
                "category": self.category.value,
                "note": self.note,
                "escalated_to_engineering": self.escalated_to_engineering,
            },
            separators=(",", ":"),
            ensure_ascii=False,
        )

    @classmethod
    def from_json(cls, line: str) -> "IssueLogEntry":
        data = json.loads(line)
        return cls(
            agent_id=data["agent_id"],
            week=int(data["week"]),
            category=IssueCategory(data["category"]),
            note=data["note"],
            escalated_to_engineering=data.get("escalated_to_engineering", False),
        )


class InputError(Exception):
    """Validation failure in CLI inputs; maps to exit code 2."""


def _store_dir(args) -> Path:
    store = getattr(args, "store", None) or os.environ.get(STORE_ENV_VAR)
    if not store:
        raise InputError(f"--store not given and {STORE_ENV_VAR} unset")
    return Path(store)


def _load_registry(args) -> Registry:
    roster = getattr(args, "roster", None)
    if roster is None:
        roster = _store_dir(args) / ROSTER_FILENAME
    roster = Path(roster)
    if not roster.exists():
        raise InputError(f"roster file not found: {roster}")
    return Registry.import_jsonl(roster)


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _parse_week(text: str) -> tuple[date, date]:
    try:
        year, week = text.upper().split("-W")
        start = date.fromisocalendar(int(year), int(week), 1)
        end = date.fromisocalendar(int(year), int(week), 7)
    except ValueError as exc:
        raise InputError(f"bad --period {text!r}; expected YYYY-Www") from exc
    return start, end


# -- subcommand handlers -------------------------------------------------------


def cmd_roster_verify(args) -> int:
    in_path = Path(args.infile)
    quota_path = Path(args.quotas)
    if not in_path.exists():
        raise InputError(f"candidates file not found: {in_path}")
    if not quota_path.exists():
        raise InputError(f"quota file not found: {quota_path}")
    candidates = read_candidates_csv(in_path)
    quotas = read_quotas_json(quota_path)
    roster = verify_roster(candidates, quotas)
    allocation = allocate_devices(roster, quotas)
    registry = Registry()
    registry.load_roster(roster, allocation)
    registry.export_jsonl(args.out)
    totals = roster.gender_totals
    print(
        f"selected={len(roster.selected)} waitlisted={len(roster.waitlist)} "
        f"rejected={len(roster.rejected)} districts={roster.district_count} "
        f"male={totals[Gender.MALE]} female={totals[Gender.FEMALE]}"
    )
    for region, count in roster.per_region_counts.items():
        print(f"  {region.value}: {count}")
    return 0


def cmd_serve(args) -> int:
    host, _, port = args.addr.rpartition(":")
    if not host or not port.isdigit():
        raise InputError(f"bad --addr {args.addr!r}; expected HOST:PORT")
    registry = _load_registry(args)
    server = ReportServer(registry, _store_dir(args), (host, int(port)))
    print(f"serving on {server.address[0]}:{server.address[1]}", flush=True)

    def _stop(signum, frame):
        server.shutdown()

    signal.signal(signal.SIGTERM, _stop)
    signal.signal(signal.SIGINT, _stop)
    server.serve_forever()
    print("store flushed, lock released")
    return 0


def cmd_pay_compute(args) -> int:
    registry = _load_registry(args)
    store = load_store(_store_dir(args))
    period = _parse_week(args.period)
    schemes, schedule = load_scheme_file(
        None if args.schedule == "default" else args.schedule
    )
    ledger = PayoutLedger()
    client = None
    if args.disburse:
        client = SimulatedPayoutClient(float_ugx=args.budget)
    for agent in registry.agents(AgentStatus.SELECTED):
        history = store.agent_history(agent.agent_id)
        if not history:
            continue
        statement = compute_payout(
            agent.agent_id, history, period, schedule, schemes
        )
        ledger.record(statement)
        if client is not None and statement.amount > 0:
            ledger.disburse(statement, client, agent.mobile_money_account)
    out = _outdir(args)
    ledger.export_csv(out / "statements.csv")
    paid = sum(
        s.amount
        for s in ledger.statements
        if s.disbursement is not None and s.disbursement.status.value == "Paid"
    )
    print(
        f"statements={len(ledger.statements)} "
        f"total_amount={sum(s.amount for s in ledger.statements)} paid={paid}"
    )
    return 0


def cmd_calls_assign(args) -> int:
    if args.operators < 1:
        raise InputError("--operators must be >= 1")
    registry = _load_registry(args)
    agents = [a.agent_id for a in registry.agents(AgentStatus.SELECTED)]
    out = _outdir(args)
    with open(out / "call_assignments.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["operator_id", "agent_id"])
        for i in range(args.operators):
            for agent_id in agents[i :: args.operators]:
                writer.writerow([i + 1, agent_id])
    loads = [len(agents[i :: args.operators]) for i in range(args.operators)]
    print(f"agents={len(agents)} operators={args.operators} loads={loads}")
    return 0


def cmd_eval_matrix(args) -> int:
    store = load_store(_store_dir(args))
    lexicon = evaluation.load_lexicon(args.lexicon)
    rules = evaluation.load_rules(args.rules)
    result = evaluation.evaluate_corpus(store, lexicon, rules)
    out = _outdir(args)
    result.matrix.to_csv(out / "matrix.csv")
    evaluation.metrics_to_csv(result.per_class, out / "metrics.csv")
    print(
        f"coverage={result.counted}/{result.available} "
        f"accuracy={result.matrix.accuracy():.4f}"
    )
    return 0


_DIMENSIONS = {
    "region": analytics.Dimension.REGION,
    "gender": analytics.Dimension.GENDER,
    "agegroup": analytics.Dimension.AGE_GROUP,
    "label": analytics.Dimension.LABEL,
    "week": analytics.Dimension.WEEK,
}


def cmd_analyze(args) -> int:
    store = load_store(_store_dir(args))
    dimension = _DIMENSIONS[args.dimension]
    registry = None
    if dimension in (
        analytics.Dimension.REGION,
        analytics.Dimension.GENDER,
        analytics.Dimension.AGE_GROUP,
    ):
        registry = _load_registry(args)
    result = analytics.aggregate(store, dimension, registry)
    out = _outdir(args)
    analytics.aggregation_to_csv(result, out / f"aggregate_{args.dimension}.csv")
    print(f"dimension={args.dimension} total={result.total} buckets={len(result.buckets)}")
    return 0


def cmd_density(args) -> int:
    if args.cell <= 0:
        raise InputError("--cell must be > 0")
    store = load_store(_store_dir(args))
    grid = analytics.spatial_density(store, cell_size=args.cell)
    out = _outdir(args)
    analytics.write_geojson(analytics.export_geojson(grid), out / "density.geojson")
    print(f"cells={len(grid.cells)} reports={grid.total}")
    return 0


def cmd_simulate(args) -> int:
    if args.config == "default":
        config = simulator.default_campaign_config()
    else:
        path = Path(args.config)
        if not path.exists():
            raise InputError(f"config file not found: {path}")
        config = simulator.load_campaign_config(path)
    trace = simulator.simulate_campaign(config)
    out = _outdir(args)
    trace.write(out)
    trace.registry.export_jsonl(out / ROSTER_FILENAME)
    print(
        f"reports={trace.total_reports} paid={trace.total_paid} "
        f"exhausted_week={trace.exhausted_week}"
    )
    return 0


def cmd_issues_log(args) -> int:
    try:
        category = IssueCategory(args.category)
    except ValueError:
        raise InputError(
            f"bad --category {args.category!r}; one of "
            f"{[c.value for c in IssueCategory]}"
        ) from None
    entry = IssueLogEntry(
        agent_id=args.agent,
        week=args.week,
        category=category,
        note=args.note,
        escalated_to_engineering=args.escalate,
    )
    store_dir = _store_dir(args)
    store_dir.mkdir(parents=True, exist_ok=True)
    with open(store_dir / ISSUES_FILENAME, "a", encoding="utf-8") as fh:
        fh.write(entry.to_json() + "\n")
    print(f"logged {category.value} issue for {args.agent} (week {args.week})")
    return 0


def cmd_issues_report(args) -> int:
    path = _store_dir(args) / ISSUES_FILENAME
    entries: list[IssueLogEntry] = []
    if path.exists():
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    entries.append(IssueLogEntry.from_json(line))
    week_entries = [e for e in entries if e.week == args.week]
    counts = {c: 0 for c in IssueCategory}
    for e in week_entries:
        counts[e.category] += 1
    escalated = [e for e in week_entries if e.escalated_to_engineering]
    if args.out:
        out = _outdir(args)
        with open(out / f"issues_week_{args.week}.csv", "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["category", "count"])
            for c in IssueCategory:
                writer.writerow([c.value, counts[c]])
    print(f"week={args.week} issues={len(week_entries)} escalated={len(escalated)}")
    for c in IssueCategory:
        print(f"  {c.value}: {counts[c]}")
    for e in escalated:
        print(f"  escalated: {e.agent_id}: {e.note}")
    return 0


def cmd_fixtures_emit(args) -> int:
    out = _outdir(args)
    write_candidates_csv(fixtures.reference_candidates(), out / "candidates.csv")
    write_quotas_json(fixtures.reference_quotas(), out / "quotas.json")
    simulator.write_campaign_config(
        simulator.default_campaign_config(), out / "campaign.json"
    )
    with resources.files("cropsense.data").joinpath("schemes_2018.json").open("rb") as src:
        with open(out / "schemes.json", "wb") as dst:
            shutil.copyfileobj(src, dst)
    fixtures.reference_confusion_matrix().to_csv(out / "diagnosis_matrix.csv")
    print(f"fixtures written under {out}")
    return 0


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cropsense",
        description="Community crop-surveillance campaign tooling.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    roster = sub.add_parser("roster", help="roster operations").add_subparsers(
        dest="subcommand", required=True
    )
    verify = roster.add_parser("verify", help="verify candidates against quotas")
    verify.add_argument("--in", dest="infile", required=True)
    verify.add_argument("--quotas", required=True)
    verify.add_argument("--out", required=True)
    verify.set_defaults(func=cmd_roster_verify)

    serve = sub.add_parser("serve", help="run the ingestion endpoint")
    serve.add_argument("--store", required=False)
    serve.add_argument("--addr", default="127.0.0.1:8787")
    serve.add_argument("--roster", required=False)
    serve.set_defaults(func=cmd_serve)

    pay = sub.add_parser("pay", help="payout operations").add_subparsers(
        dest="subcommand", required=True
    )
    compute = pay.add_parser("compute", help="compute weekly payout statements")
    compute.add_argument("--store", required=False)
    compute.add_argument("--roster", required=False)
    compute.add_argument("--period", required=True, help="ISO week, e.g. 2018-W25")
    compute.add_argument("--schedule", default="default")
    compute.add_argument("--disburse", action="store_true")
    compute.add_argument("--budget", type=int, default=10_000_000)
    compute.add_argument("--out", required=True)
    compute.set_defaults(func=cmd_pay_compute)

    calls = sub.add_parser("calls", help="call-centre operations").add_subparsers(
        dest="subcommand", required=True
    )
    assign = calls.add_parser("assign", help="balance agents across operators")
    assign.add_argument("--roster", required=False)
    assign.add_argument("--store", required=False)
    assign.add_argument("--operators", type=int, default=6)
    assign.add_argument("--out", required=True)
    assign.set_defaults(func=cmd_calls_assign)

    ev = sub.add_parser("eval", help="evaluation operations").add_subparsers(
        dest="subcommand", required=True
    )
    matrix = ev.add_parser("matrix", help="confusion matrix over the store")
    matrix.add_argument("--store", required=False)
    matrix.add_argument("--lexicon", default=None)
    matrix.add_argument("--rules", default=None)
    matrix.add_argument("--out", required=True)
    matrix.set_defaults(func=cmd_eval_matrix)

    analyze = sub.add_parser("analyze", help="aggregate the report store")
    analyze.add_argument("--store", required=False)
    analyze.add_argument("--roster", required=False)
    analyze.add_argument("--dimension", choices=sorted(_DIMENSIONS), required=True)
    analyze.add_argument("--out", required=True)
    analyze.set_defaults(func=cmd_analyze)

    density = sub.add_parser("density", help="spatial report density grid")
    density.add_argument("--store", required=False)
    density.add_argument("--cell", type=float, default=0.1)
    density.add_argument("--out", required=True)
    density.set_defaults(func=cmd_density)

    sim = sub.add_parser("simulate", help="run a synthetic campaign")
    sim.add_argument("--config", default="default")
    sim.add_argument("--out", required=True)
    sim.set_defaults(func=cmd_simulate)

    issues = sub.add_parser("issues", help="call-centre issue log").add_subparsers(
        dest="subcommand", required=True
    )
    log = issues.add_parser("log", help="append one issue")
    log.add_argument("--store", required=False)
    log.add_argument("--agent", required=True)
    log.add_argument("--week", type=int, required=True)
    log.add_argument("--category", required=True)
    log.add_argument("--note", default="")
    log.add_argument("--escalate", action="store_true")
    log.set_defaults(func=cmd_issues_log)
    report = issues.add_parser("report", help="weekly issue summary")
    report.add_argument("--store", required=False)
    report.add_argument("--week", type=int, required=True)
    report.add_argument("--out", default=None)
    report.set_defaults(func=cmd_issues_report)

    fix = sub.add_parser("fixtures", help="bundled reference data").add_subparsers(
        dest="subcommand", required=True
    )
    emit = fix.add_parser("emit", help="write reference fixtures to a directory")
    emit.add_argument("--out", required=True)
    emit.set_defaults(func=cmd_fixtures_emit)

    return parser


_VALIDATION_ERRORS = (
    InputError,
    MalformedProfile,
    QuotaConflict,
    simulator.ConfigInvalid,
)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except StoreLocked as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (RegistryError, IngestionError, IncentiveError, analytics.AnalyticsError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
