"""Deterministic synthetic campaigns at desk scale.

Agents with heterogeneous weekly participation submit geo-tagged reports
through the real ingestion service and are paid weekly through the real
incentive pipeline against a simulated mobile-money float. Everything is
driven by one seeded generator, so a config reproduces its trace
byte-for-byte.

Behavioral model: weekly counts are gamma-poisson (negative-binomial
shaped) around base_rate x season x incentive multiplier; once the
campaign budget is exhausted and disbursements start failing, each
agent's rate decays by their price sensitivity per week, floored at a
quarter of the base activity.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, asdict
from datetime import date, datetime, time, timedelta, timezone
from pathlib import Path
from typing import Sequence

import numpy as np

from . import analytics
from .fixtures import REGION_COORDS, reference_candidates, reference_quotas
from .incentives import (
    PayoutLedger,
    ReceiptStatus,
    SchemeConfig,
    SchemeId,
    SchemeSchedule,
    SimulatedPayoutClient,
    compute_payout,
    load_scheme_file,
    report_price,
)
from .ingestion import Capture, IngestionService, ReportLabel, ReportStore
from .registry import (
    AgentStatus,
    Registry,
    Zardi,
    allocate_devices,
    verify_roster,
)

__all__ = [
    "AgentBehavior",
    "CampaignConfig",
    "CampaignTrace",
    "ConfigInvalid",
    "simulate_campaign",
    "high_performer_scenario",
    "default_campaign_config",
    "reference_registry",
    "load_campaign_config",
    "write_campaign_config",
]

DEFAULT_SEED = 20180416
DEFAULT_BUDGET_UGX = 54_500_000
CAMPAIGN_START = date(2018, 4, 16)
ACTIVITY_FLOOR = 0.25
ACTIVITY_CEIL = 4.0


class ConfigInvalid(Exception):
    pass


@dataclass
class AgentBehavior:
    agent_id: str
    base_rate: float
    price_sensitivity: float
    home_lat: float
    home_lon: float
    roam_radius: float = 0.05
    dropout_week: int | None = None
    comment_style: str = "mixed"
    # probabilities over Disease, Whitefly, Anomaly, Other
    label_mix: tuple[float, float, float, float] = (0.55, 0.25, 0.07, 0.13)

    def validate(self) -> None:
        if self.base_rate < 0:
            raise ConfigInvalid(f"{self.agent_id}: base_rate must be >= 0")
        if self.price_sensitivity < 0:
            raise ConfigInvalid(f"{self.agent_id}: price_sensitivity must be >= 0")
        if abs(sum(self.label_mix) - 1.0) > 1e-9:
            raise ConfigInvalid(f"{self.agent_id}: label_mix must sum to 1")


@dataclass
class CampaignConfig:
    seed: int
    behaviors: list[AgentBehavior]
    duration_days: int = 227
    start_date: date = CAMPAIGN_START
    budget: int = DEFAULT_BUDGET_UGX
    transfer_fee: int = 500
    season_modifiers: tuple[float, ...] = ()
    region_season: dict[str, tuple[float, ...]] = field(default_factory=dict)
    dispersion: float = 8.0
    scheme_file: str | None = None  # None -> packaged preset

    def validate(self) -> None:
        if self.duration_days <= 0:
            raise ConfigInvalid("duration_days must be > 0")
        if self.budget < 0:
            raise ConfigInvalid("budget must be >= 0")
        if not self.behaviors:
            raise ConfigInvalid("no agent behaviors configured")
        for behavior in self.behaviors:
            behavior.validate()

    @property
    def weeks(self) -> int:
        return -(-self.duration_days // 7)  # ceil

    @property
    def end_date(self) -> date:
        return self.start_date + timedelta(days=self.duration_days - 1)

    def season(self, week: int, region: Zardi) -> float:
        base = 1.0
        if self.season_modifiers:
            base = self.season_modifiers[min(week, len(self.season_modifiers) - 1)]
        overrides = self.region_season.get(region.value)
        if overrides:
            base *= overrides[min(week, len(overrides) - 1)]
        return base


def reference_registry() -> Registry:
    """The verified 175-agent roster with devices assigned."""
    roster = verify_roster(reference_candidates(), reference_quotas())
    allocation = allocate_devices(roster, reference_quotas())
    registry = Registry()
    registry.load_roster(roster, allocation)
    return registry


def _default_season_curve(weeks: int) -> tuple[float, ...]:
    out = []
    for w in range(weeks):
        if w < 4:
            m = 0.60 + 0.08 * w
        elif w < 9:
            m = 0.90 + 0.10 * (w - 4)
        elif w < 15:
            m = 1.55
        elif w < 20:
            m = 1.25
        elif w < 24:
            m = 1.00
        else:
            m = max(0.5, 0.90 - 0.04 * (w - 24))
        out.append(round(m, 3))
    return tuple(out)


# Activity skew by station, echoing the campaign's regional ordering
# (near East highest, West Nile lowest, North suppressed by drought).
_REGION_RATE_SKEW = {
    Zardi.TORORO: 1.85,
    Zardi.WAKISO: 1.35,
    Zardi.SOROTI: 1.10,
    Zardi.LIRA: 0.80,
    Zardi.BULINDI: 0.85,
    Zardi.RWEBITABA: 0.75,
    Zardi.ARUA: 0.65,
}

_COMMENT_BANK = {
    ReportLabel.DISEASE: (
        "leaves are yellow and curling",
        "mosaic on the young leaves",
        "brown streak marks on stems",
        "lesions and wilting leaves",
        "chlorosis on most leaves",
        "plant looks diseased and stunted",
        "twisted pale leaves",
        "black spots on the stem",
        "leaves dry and rotten roots",
    ),
    ReportLabel.WHITEFLY: (
        "white fly under leaf",
        "many whiteflies on this plant",
        "whitefly eggs under the leaves",
        "pest white flies everywhere",
    ),
    ReportLabel.ANOMALY: (
        "strange anomaly on this plant",
        "unknown marks on the leaves",
        "leaf folded and dry",
        "engulfed shoot looks odd",
    ),
    ReportLabel.OTHER: (
        "healthy plant",
        "new variety in this garden",
        "garden looks healthy",
        "other observation on the farm",
    ),
}


def default_behaviors(registry: Registry, seed: int) -> list[AgentBehavior]:
    """Heterogeneous participation profiles for the reference roster."""
    rng = np.random.Generator(np.random.PCG64(seed ^ 0x5EA50))
    agents = registry.agents(AgentStatus.SELECTED)
    behaviors: list[AgentBehavior] = []
    # A few very high reporters; intrinsically motivated, so barely
    # price-sensitive (the top one is the Near East district leader).
    star_rates = {7: 200.0, 61: 240.0, 124: 300.0}
    for index, agent in enumerate(agents):
        skew = _REGION_RATE_SKEW[agent.region]
        base = float(rng.gamma(1.3, 7.5)) * skew
        sensitivity = float(rng.uniform(0.08, 0.30))
        if index in star_rates:
            base = star_rates[index]
            sensitivity = 0.06
        lat0, lon0 = REGION_COORDS[agent.region]
        # stable across processes, unlike hash()
        district_slot = sum(agent.profile.district.encode()) % 7 - 3
        home_lat = lat0 + district_slot * 0.09 + float(rng.uniform(-0.04, 0.04))
        home_lon = lon0 + (district_slot % 3 - 1) * 0.11 + float(rng.uniform(-0.04, 0.04))
        mix = rng.dirichlet((22.0, 10.0, 2.8, 5.2))
        mix = tuple(round(float(x), 6) for x in mix)
        mix = mix[:3] + (round(1.0 - sum(mix[:3]), 6),)
        behaviors.append(
            AgentBehavior(
                agent_id=agent.agent_id,
                base_rate=round(base, 3),
                price_sensitivity=round(sensitivity, 3),
                home_lat=round(home_lat, 5),
                home_lon=round(home_lon, 5),
                roam_radius=round(float(rng.uniform(0.02, 0.08)), 4),
                dropout_week=26 if index % 53 == 11 else None,
                comment_style="terse" if index % 5 == 0 else "mixed",
                label_mix=mix,
            )
        )
    return behaviors


def default_campaign_config(seed: int = DEFAULT_SEED) -> CampaignConfig:
    """The 175-agent, 227-day preset over the packaged scheme schedule."""
    registry = reference_registry()
    weeks = -(-227 // 7)
    lira_dry = tuple(1.0 if w < 14 else 0.55 for w in range(weeks))
    return CampaignConfig(
        seed=seed,
        behaviors=default_behaviors(registry, seed),
        duration_days=227,
        start_date=CAMPAIGN_START,
        budget=DEFAULT_BUDGET_UGX,
        season_modifiers=_default_season_curve(weeks),
        region_season={Zardi.LIRA.value: lira_dry},
    )


@dataclass
class CampaignTrace:
    store: ReportStore
    ledger: PayoutLedger
    client: SimulatedPayoutClient
    registry: Registry
    config: CampaignConfig
    weekly_reports: list[int]
    weekly_spend: list[int]
    exhausted_week: int | None

    @property
    def total_reports(self) -> int:
        return len(self.store)

    @property
    def total_paid(self) -> int:
        return sum(self.weekly_spend)

    def weekly_series(self) -> list[tuple[date, int]]:
        return analytics.weekly_series(
            self.store, (self.config.start_date, self.config.end_date)
        )

    def write(self, outdir: str | Path) -> None:
        out = Path(outdir)
        out.mkdir(parents=True, exist_ok=True)
        self.store.export_jsonl(out / "reports.jsonl")
        self.ledger.export_csv(out / "ledger.csv")
        analytics.weekly_series_to_csv(self.weekly_series(), out / "weekly_series.csv")
        with open(out / "weekly_spend.csv", "w", encoding="utf-8") as fh:
            fh.write("week,spend\n")
            for week, spend in enumerate(self.weekly_spend):
                fh.write(f"{week},{spend}\n")
        summary = {
            "total_reports": self.total_reports,
            "total_paid": self.total_paid,
            "budget": self.config.budget,
            "exhausted_week": self.exhausted_week,
            "weeks": self.config.weeks,
            "float_remaining": self.client.remaining_float,
        }
        with open(out / "summary.json", "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _nb_count(rng: np.random.Generator, mean: float, dispersion: float) -> int:
    """Negative-binomial-shaped integer draw via a gamma-poisson mixture."""
    if mean <= 0:
        return 0
    lam = rng.gamma(dispersion, mean / dispersion)
    return int(rng.poisson(lam))


def _comment(rng: np.random.Generator, style: str, label: ReportLabel) -> str:
    bank = _COMMENT_BANK[label]
    text = bank[int(rng.integers(0, len(bank)))]
    if style == "terse":
        if rng.random() < 0.25:
            return ""
        return " ".join(text.split()[:2])
    return text


def _incentive_multiplier(
    behavior: AgentBehavior, next_ordinal: int, scheme: SchemeConfig
) -> float:
    marginal = report_price(next_ordinal, scheme)
    mult = 1.0 + behavior.price_sensitivity * (marginal / scheme.base_price - 1.0)
    return min(ACTIVITY_CEIL, max(ACTIVITY_FLOOR, mult))


def simulate_campaign(
    config: CampaignConfig, registry: Registry | None = None
) -> CampaignTrace:
    """Run the campaign week by week; fully deterministic given the seed."""
    return _run(config, registry, boosted_ids=frozenset())


def high_performer_scenario(
    config: CampaignConfig, n_agents_over_400_per_week: int, registry: Registry | None = None
) -> CampaignTrace:
    """Designate the first n agents (by id) as >400 reports/week performers."""
    behaviors = sorted(config.behaviors, key=lambda b: b.agent_id)
    if n_agents_over_400_per_week > len(behaviors):
        raise ConfigInvalid("more high performers than roster agents")
    boosted = frozenset(
        b.agent_id for b in behaviors[:n_agents_over_400_per_week]
    )
    return _run(config, registry, boosted_ids=boosted)


def _run(
    config: CampaignConfig,
    registry: Registry | None,
    boosted_ids: frozenset[str],
) -> CampaignTrace:
    config.validate()
    if registry is None:
        registry = reference_registry()
    for behavior in config.behaviors:
        agent = registry.get(behavior.agent_id)  # raises UnknownAgent
        if agent.status is not AgentStatus.SELECTED:
            raise ConfigInvalid(f"agent {behavior.agent_id!r} is not Selected")

    schemes, schedule = load_scheme_file(config.scheme_file)
    if schedule.start > config.start_date:
        raise ConfigInvalid(
            f"schedule starts {schedule.start}, after campaign start {config.start_date}"
        )

    rng = np.random.Generator(np.random.PCG64(config.seed))
    store = ReportStore()
    service = IngestionService(registry, store)
    client = SimulatedPayoutClient(
        float_ugx=config.budget, transfer_fee=config.transfer_fee
    )
    ledger = PayoutLedger()

    behaviors = sorted(config.behaviors, key=lambda b: b.agent_id)
    weekly_reports: list[int] = []
    weekly_spend: list[int] = []
    exhausted_week: int | None = None

    for week in range(config.weeks):
        week_start = config.start_date + timedelta(days=7 * week)
        days_in_week = min(7, config.duration_days - 7 * week)
        week_end = week_start + timedelta(days=days_in_week - 1)
        scheme_now = schemes[schedule.scheme_for(week_start)]
        submitted = 0

        for behavior in behaviors:
            if behavior.dropout_week is not None and week >= behavior.dropout_week:
                continue
            region = registry.get(behavior.agent_id).region
            decay = 1.0
            if exhausted_week is not None and week > exhausted_week:
                decay = (1.0 - behavior.price_sensitivity) ** (week - exhausted_week)
            next_ordinal = store.agent_report_count(behavior.agent_id) + 1
            mult = _incentive_multiplier(behavior, next_ordinal, scheme_now)
            activity = min(ACTIVITY_CEIL, max(ACTIVITY_FLOOR, mult * decay))
            mean = behavior.base_rate * config.season(week, region) * activity
            mean *= days_in_week / 7.0
            if behavior.agent_id in boosted_ids:
                count = int(rng.integers(420, 560))
            else:
                count = _nb_count(rng, mean, config.dispersion)
            if count == 0:
                continue

            day_offsets = np.sort(rng.integers(0, days_in_week, size=count))
            seconds = rng.integers(6 * 3600, 18 * 3600, size=count)
            order = np.lexsort((seconds, day_offsets))
            radii = behavior.roam_radius * np.sqrt(rng.random(count))
            angles = rng.random(count) * 2.0 * math.pi
            labels = rng.choice(4, size=count, p=behavior.label_mix)
            delays = rng.integers(120, 7200, size=count)

            for i in order:
                received = datetime.combine(
                    week_start + timedelta(days=int(day_offsets[i])),
                    time(0, 0),
                    tzinfo=timezone.utc,
                ) + timedelta(seconds=int(seconds[i]))
                label = list(ReportLabel)[int(labels[i])]
                digest = hashlib.sha1(
                    f"{behavior.agent_id}:{week}:{int(i)}".encode()
                ).hexdigest()
                capture = Capture(
                    captured_at=received - timedelta(seconds=int(delays[i])),
                    latitude=round(behavior.home_lat + radii[i] * math.cos(angles[i]), 6),
                    longitude=round(behavior.home_lon + radii[i] * math.sin(angles[i]), 6),
                    label=label,
                    comment=_comment(rng, behavior.comment_style, label),
                    image_ref=digest,
                )
                service.submit_report(behavior.agent_id, capture, received_at=received)
                submitted += 1

        # weekly payout run over the real incentive pipeline
        spend_before = config.budget - client.remaining_float
        for behavior in behaviors:
            history = store.agent_history(behavior.agent_id)
            if not history:
                continue
            statement = compute_payout(
                behavior.agent_id, history, (week_start, week_end), schedule, schemes
            )
            ledger.record(statement)
            if statement.amount <= 0:
                continue
            account = registry.get(behavior.agent_id).mobile_money_account
            receipt = ledger.disburse(statement, client, account)
            if (
                receipt.status is ReceiptStatus.FAILED
                and receipt.failure_reason == "InsufficientFloat"
                and exhausted_week is None
            ):
                exhausted_week = week
        weekly_spend.append(config.budget - client.remaining_float - spend_before)
        weekly_reports.append(submitted)

    return CampaignTrace(
        store=store,
        ledger=ledger,
        client=client,
        registry=registry,
        config=config,
        weekly_reports=weekly_reports,
        weekly_spend=weekly_spend,
        exhausted_week=exhausted_week,
    )


# -- config file I/O -----------------------------------------------------------


def write_campaign_config(config: CampaignConfig, path: str | Path) -> None:
    payload = {
        "seed": config.seed,
        "duration_days": config.duration_days,
        "start_date": config.start_date.isoformat(),
        "budget": config.budget,
        "transfer_fee": config.transfer_fee,
        "season_modifiers": list(config.season_modifiers),
        "region_season": {k: list(v) for k, v in config.region_season.items()},
        "dispersion": config.dispersion,
        "scheme_file": config.scheme_file,
        "behaviors": [
            {**asdict(b), "label_mix": list(b.label_mix)} for b in config.behaviors
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def load_campaign_config(path: str | Path) -> CampaignConfig:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    behaviors = [
        AgentBehavior(
            agent_id=b["agent_id"],
            base_rate=b["base_rate"],
            price_sensitivity=b["price_sensitivity"],
            home_lat=b["home_lat"],
            home_lon=b["home_lon"],
            roam_radius=b.get("roam_radius", 0.05),
            dropout_week=b.get("dropout_week"),
            comment_style=b.get("comment_style", "mixed"),
            label_mix=tuple(b.get("label_mix", (0.55, 0.25, 0.07, 0.13))),
        )
        for b in data["behaviors"]
    ]
    return CampaignConfig(
        seed=data["seed"],
        behaviors=behaviors,
        duration_days=data.get("duration_days", 227),
        start_date=date.fromisoformat(data.get("start_date", CAMPAIGN_START.isoformat())),
        budget=data.get("budget", DEFAULT_BUDGET_UGX),
        transfer_fee=data.get("transfer_fee", 500),
        season_modifiers=tuple(data.get("season_modifiers", ())),
        region_season={
            k: tuple(v) for k, v in data.get("region_season", {}).items()
        },
        dispersion=data.get("dispersion", 8.0),
        scheme_file=data.get("scheme_file"),
    )
