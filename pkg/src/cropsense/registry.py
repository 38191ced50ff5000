"""Farmer crowd registry: candidate rosters, selection, devices, leaders.

Holds the campaign's verified participant roster. Verification and device
allocation are pure functions over a candidate snapshot; the Registry
object itself is mutated only under a single writer lock.
"""

from __future__ import annotations

import csv
import io
import json
import threading
from dataclasses import dataclass, field, fields
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

__all__ = [
    "Zardi",
    "RegionId",
    "Gender",
    "ProducerScale",
    "AgentStatus",
    "AgeGroup",
    "Criterion",
    "CandidateProfile",
    "FarmerAgent",
    "RegionQuota",
    "EligibilityResult",
    "VerifiedRoster",
    "Registry",
    "check_eligibility",
    "verify_roster",
    "allocate_devices",
    "age_group_for",
    "read_candidates_csv",
    "write_candidates_csv",
    "default_quotas",
    "read_quotas_json",
    "write_quotas_json",
]

YOUTH_AGE_RANGE = (20, 30)
SMALLHOLDER_ACREAGE = (0.5, 2.0)
ELIGIBLE_AGE_RANGE = (20, 60)
MEDIUM_SCALE_EXCEPTION = "MediumScaleProducer"


class RegistryError(Exception):
    """Base class for registry failures."""


class MalformedProfile(RegistryError):
    """A candidate profile has missing or unparseable fields."""


class QuotaConflict(RegistryError):
    """Two quotas name the same region, or a candidate region has no quota."""


class InsufficientDevices(RegistryError):
    """A region's selected agents exceed the devices available to them."""


class NoVotes(RegistryError):
    """A leader election was run with an empty vote map."""


class UnknownAgent(RegistryError):
    """An agent id is not present in the registry."""


class Zardi(str, Enum):
    """The seven regional training stations anchoring each cohort."""

    ARUA = "Arua"
    BULINDI = "Bulindi"
    LIRA = "Lira"
    RWEBITABA = "Rwebitaba"
    SOROTI = "Soroti"
    TORORO = "Tororo"
    WAKISO = "Wakiso"


REGION_LABELS: dict[Zardi, str] = {
    Zardi.ARUA: "West Nile",
    Zardi.BULINDI: "Near West",
    Zardi.LIRA: "North",
    Zardi.RWEBITABA: "Far West",
    Zardi.SOROTI: "Far East",
    Zardi.TORORO: "Near East",
    Zardi.WAKISO: "Central",
}


@dataclass(frozen=True)
class RegionId:
    """A ZARDI and its human-readable region label; the mapping is fixed."""

    zardi: Zardi
    label: str

    def __post_init__(self) -> None:
        expected = REGION_LABELS[self.zardi]
        if self.label != expected:
            raise MalformedProfile(
                f"region label {self.label!r} does not match {self.zardi.value} "
                f"(expected {expected!r})"
            )

    @classmethod
    def of(cls, zardi: Zardi) -> "RegionId":
        return cls(zardi=zardi, label=REGION_LABELS[zardi])


class Gender(str, Enum):
    MALE = "Male"
    FEMALE = "Female"


class ProducerScale(str, Enum):
    SMALLHOLDER = "Smallholder"
    MEDIUM_SCALE = "MediumScale"


class AgentStatus(str, Enum):
    SELECTED = "Selected"
    WAITLISTED = "Waitlisted"
    REJECTED = "Rejected"
    WITHDRAWN = "Withdrawn"


class AgeGroup(str, Enum):
    A20_30 = "20-30"
    A31_40 = "31-40"
    A41_50 = "41-50"
    A51_60 = "51-60"


def age_group_for(age: int) -> AgeGroup | None:
    """Age band for reporting; None outside the campaign's 20-60 range."""
    if 20 <= age <= 30:
        return AgeGroup.A20_30
    if 31 <= age <= 40:
        return AgeGroup.A31_40
    if 41 <= age <= 50:
        return AgeGroup.A41_50
    if 51 <= age <= 60:
        return AgeGroup.A51_60
    return None


class Criterion(str, Enum):
    """Identifiers for the individual selection criteria."""

    AGE_RANGE = "AgeRange"
    FARMERS_GROUP = "FarmersGroup"
    EDUCATION = "Education"
    FUNCTIONAL_PHONE = "FunctionalPhone"
    MOBILE_MONEY = "MobileMoney"
    ACREAGE = "Acreage"
    LITERACY = "Literacy"
    CHARGING_ACCESS = "ChargingAccess"
    SPOUSE_INFORMED = "SpouseInformed"
    ID_OR_LC_LETTER = "IdOrLcLetter"


@dataclass
class CandidateProfile:
    """One sourced candidate, fully populated before verification runs."""

    candidate_id: str
    name: str
    region: RegionId
    district: str
    gender: Gender
    age: int
    acreage: float
    in_farmers_group: bool
    education_primary_or_above: bool
    owns_functional_phone: bool
    has_mobile_money: bool
    literate: bool
    has_charging_access: bool
    spouse_informed: bool
    has_id_or_lc_letter: bool
    producer_scale: ProducerScale

    def validate(self) -> None:
        for f in fields(self):
            if getattr(self, f.name) is None:
                raise MalformedProfile(
                    f"candidate {self.candidate_id!r}: field {f.name!r} is unset"
                )
        if self.age <= 0:
            raise MalformedProfile(f"candidate {self.candidate_id!r}: age must be > 0")
        if self.acreage <= 0:
            raise MalformedProfile(
                f"candidate {self.candidate_id!r}: acreage must be > 0"
            )

    @property
    def is_youth(self) -> bool:
        return YOUTH_AGE_RANGE[0] <= self.age <= YOUTH_AGE_RANGE[1]


@dataclass
class FarmerAgent:
    """A candidate's campaign identity after verification."""

    agent_id: str
    profile: CandidateProfile
    status: AgentStatus
    mobile_money_account: str
    device_id: str | None = None
    is_district_leader: bool = False

    @property
    def age_group(self) -> AgeGroup | None:
        return age_group_for(self.profile.age)

    @property
    def region(self) -> Zardi:
        return self.profile.region.zardi


@dataclass(frozen=True)
class RegionQuota:
    region: Zardi
    devices: int = 40
    female_target: int = 2
    male_target: int = 2
    youth_target: int = 2

    def __post_init__(self) -> None:
        if self.devices < 0 or min(self.female_target, self.male_target, self.youth_target) < 0:
            raise QuotaConflict(f"negative quota for {self.region.value}")


def default_quotas() -> list[RegionQuota]:
    """One 40-device quota per training station, per-district targets 2/2/2."""
    return [RegionQuota(region=z) for z in Zardi]


@dataclass(frozen=True)
class EligibilityResult:
    eligible: bool
    failed_criteria: tuple[Criterion, ...]
    exception_applied: str | None = None


def check_eligibility(
    candidate: CandidateProfile, allow_medium_scale: bool = False
) -> EligibilityResult:
    """Apply every selection criterion; enumerate all failures.

    With allow_medium_scale, an acreage above the smallholder band is
    waived (exception tag MediumScaleProducer); the lower bound and all
    other criteria still apply.
    """
    candidate.validate()
    failed: list[Criterion] = []
    exception: str | None = None

    lo, hi = ELIGIBLE_AGE_RANGE
    if not lo <= candidate.age <= hi:
        failed.append(Criterion.AGE_RANGE)
    if not candidate.in_farmers_group:
        failed.append(Criterion.FARMERS_GROUP)
    if not candidate.education_primary_or_above:
        failed.append(Criterion.EDUCATION)
    if not candidate.owns_functional_phone:
        failed.append(Criterion.FUNCTIONAL_PHONE)
    if not candidate.has_mobile_money:
        failed.append(Criterion.MOBILE_MONEY)

    acre_lo, acre_hi = SMALLHOLDER_ACREAGE
    if candidate.acreage > acre_hi and allow_medium_scale:
        exception = MEDIUM_SCALE_EXCEPTION
    elif not acre_lo <= candidate.acreage <= acre_hi:
        failed.append(Criterion.ACREAGE)

    if not candidate.literate:
        failed.append(Criterion.LITERACY)
    if not candidate.has_charging_access:
        failed.append(Criterion.CHARGING_ACCESS)
    if not candidate.spouse_informed:
        failed.append(Criterion.SPOUSE_INFORMED)
    if not candidate.has_id_or_lc_letter:
        failed.append(Criterion.ID_OR_LC_LETTER)

    return EligibilityResult(
        eligible=not failed,
        failed_criteria=tuple(failed),
        exception_applied=exception,
    )


@dataclass
class VerifiedRoster:
    """Outcome of verifying a candidate list against regional quotas."""

    selected: list[FarmerAgent]
    waitlist: list[FarmerAgent]
    rejected: list[FarmerAgent]
    per_region_counts: dict[Zardi, int]
    exceptions: dict[str, str] = field(default_factory=dict)  # agent_id -> tag

    @property
    def gender_totals(self) -> dict[Gender, int]:
        totals = {Gender.MALE: 0, Gender.FEMALE: 0}
        for agent in self.selected:
            totals[agent.profile.gender] += 1
        return totals

    @property
    def district_count(self) -> int:
        return len({(a.region, a.profile.district) for a in self.selected})

    def all_agents(self) -> list[FarmerAgent]:
        return self.selected + self.waitlist + self.rejected


def _mobile_money_account(candidate: CandidateProfile) -> str:
    return f"mm:{candidate.candidate_id}" if candidate.has_mobile_money else ""


def _rank_region_candidates(
    candidates: Sequence[CandidateProfile], quota: RegionQuota
) -> list[CandidateProfile]:
    """Deterministic selection order within a region.

    Per-district targets (female/male/youth) are satisfied first, district
    by district; the remainder fills in (district, candidate_id) order, so
    unmet targets relax to the next available candidates.
    """
    by_district: dict[str, list[CandidateProfile]] = {}
    for cand in candidates:
        by_district.setdefault(cand.district, []).append(cand)

    target_picks: list[CandidateProfile] = []
    leftovers: list[CandidateProfile] = []
    for district in sorted(by_district):
        pool = sorted(by_district[district], key=lambda c: c.candidate_id)
        picked: set[str] = set()

        def take(pred, limit: int) -> None:
            taken = 0
            for cand in pool:
                if taken >= limit:
                    break
                if cand.candidate_id in picked or not pred(cand):
                    continue
                picked.add(cand.candidate_id)
                target_picks.append(cand)
                taken += 1

        take(lambda c: c.gender is Gender.FEMALE, quota.female_target)
        take(lambda c: c.gender is Gender.MALE, quota.male_target)
        take(lambda c: c.is_youth, quota.youth_target)
        leftovers.extend(c for c in pool if c.candidate_id not in picked)

    leftovers.sort(key=lambda c: (c.district, c.candidate_id))
    return target_picks + leftovers


def verify_roster(
    candidates: Sequence[CandidateProfile],
    quotas: Sequence[RegionQuota],
    allow_medium_scale: bool = True,
) -> VerifiedRoster:
    """Partition candidates into selected / waitlisted / rejected.

    Eligible candidates beyond a region's device quota are waitlisted;
    surplus quota from under-subscribed regions is then reassigned, in
    station order, to regions still holding eligible waitlisted candidates.
    """
    quota_by_region: dict[Zardi, RegionQuota] = {}
    for quota in quotas:
        if quota.region in quota_by_region:
            raise QuotaConflict(f"duplicate quota for region {quota.region.value}")
        quota_by_region[quota.region] = quota
    for cand in candidates:
        if cand.region.zardi not in quota_by_region:
            raise QuotaConflict(f"no quota covers region {cand.region.zardi.value}")

    eligible_by_region: dict[Zardi, list[CandidateProfile]] = {z: [] for z in quota_by_region}
    exceptions: dict[str, str] = {}
    rejected: list[FarmerAgent] = []
    for cand in candidates:
        result = check_eligibility(cand, allow_medium_scale=allow_medium_scale)
        if result.eligible:
            eligible_by_region[cand.region.zardi].append(cand)
            if result.exception_applied:
                exceptions[cand.candidate_id] = result.exception_applied
        else:
            rejected.append(
                FarmerAgent(
                    agent_id=cand.candidate_id,
                    profile=cand,
                    status=AgentStatus.REJECTED,
                    mobile_money_account=_mobile_money_account(cand),
                )
            )

    selected_by_region: dict[Zardi, list[CandidateProfile]] = {}
    waitlist_by_region: dict[Zardi, list[CandidateProfile]] = {}
    for region, quota in quota_by_region.items():
        ranked = _rank_region_candidates(eligible_by_region.get(region, []), quota)
        selected_by_region[region] = ranked[: quota.devices]
        waitlist_by_region[region] = ranked[quota.devices :]

    # Reassign surplus quota to the next regions with waitlisted candidates.
    surplus = sum(
        max(0, quota_by_region[z].devices - len(selected_by_region[z]))
        for z in quota_by_region
    )
    for region in Zardi:
        if region not in quota_by_region or surplus <= 0:
            continue
        wait = waitlist_by_region[region]
        promoted = wait[:surplus]
        waitlist_by_region[region] = wait[len(promoted) :]
        selected_by_region[region].extend(promoted)
        surplus -= len(promoted)

    selected: list[FarmerAgent] = []
    waitlist: list[FarmerAgent] = []
    per_region_counts: dict[Zardi, int] = {}
    for region in Zardi:
        if region not in quota_by_region:
            continue
        for cand in selected_by_region[region]:
            selected.append(
                FarmerAgent(
                    agent_id=cand.candidate_id,
                    profile=cand,
                    status=AgentStatus.SELECTED,
                    mobile_money_account=_mobile_money_account(cand),
                )
            )
        for cand in waitlist_by_region[region]:
            waitlist.append(
                FarmerAgent(
                    agent_id=cand.candidate_id,
                    profile=cand,
                    status=AgentStatus.WAITLISTED,
                    mobile_money_account=_mobile_money_account(cand),
                )
            )
        per_region_counts[region] = len(selected_by_region[region])

    return VerifiedRoster(
        selected=selected,
        waitlist=waitlist,
        rejected=rejected,
        per_region_counts=per_region_counts,
        exceptions=exceptions,
    )


def _device_pool(region: Zardi, devices: int) -> list[str]:
    prefix = region.value[:3].upper()
    return [f"{prefix}-{i:03d}" for i in range(1, devices + 1)]


def allocate_devices(
    roster: VerifiedRoster, quotas: Sequence[RegionQuota]
) -> dict[str, str]:
    """Assign exactly one device to every Selected agent.

    Agents draw from their own region's pool first; overflow (a region
    whose selection exceeded its own quota through reassignment) draws
    from other regions' spare pools in station order.
    """
    quota_by_region = {q.region: q for q in quotas}
    pools = {
        z: _device_pool(z, quota_by_region[z].devices) for z in quota_by_region
    }
    allocation: dict[str, str] = {}
    overflow: list[FarmerAgent] = []
    for agent in roster.selected:
        pool = pools.get(agent.region)
        if pool is None:
            raise QuotaConflict(f"no quota covers region {agent.region.value}")
        if pool:
            allocation[agent.agent_id] = pool.pop(0)
        else:
            overflow.append(agent)

    spare: list[str] = []
    for region in Zardi:
        spare.extend(pools.get(region, []))
    if len(overflow) > len(spare):
        regions = sorted({a.region.value for a in overflow})
        raise InsufficientDevices(
            f"{len(overflow)} selected agents beyond device quota in {regions}"
        )
    for agent in overflow:
        allocation[agent.agent_id] = spare.pop(0)
    return allocation


class Registry:
    """Mutable agent registry; writes are serialized, reads may be concurrent."""

    def __init__(self) -> None:
        self._agents: dict[str, FarmerAgent] = {}
        self._waitlist_order: list[str] = []
        self._freed_device: str | None = None
        self._lock = threading.Lock()

    def load_roster(
        self, roster: VerifiedRoster, allocation: dict[str, str] | None = None
    ) -> None:
        with self._lock:
            for agent in roster.all_agents():
                self._agents[agent.agent_id] = agent
            self._waitlist_order = [a.agent_id for a in roster.waitlist]
            if allocation:
                for agent_id, device_id in allocation.items():
                    self._agents[agent_id].device_id = device_id

    def add(self, agent: FarmerAgent) -> None:
        with self._lock:
            self._agents[agent.agent_id] = agent
            if agent.status is AgentStatus.WAITLISTED:
                self._waitlist_order.append(agent.agent_id)

    def get(self, agent_id: str) -> FarmerAgent:
        agent = self._agents.get(agent_id)
        if agent is None:
            raise UnknownAgent(f"unknown agent {agent_id!r}")
        return agent

    def __contains__(self, agent_id: str) -> bool:
        return agent_id in self._agents

    def agents(self, status: AgentStatus | None = None) -> list[FarmerAgent]:
        agents = sorted(self._agents.values(), key=lambda a: a.agent_id)
        if status is None:
            return agents
        return [a for a in agents if a.status is status]

    def withdraw(self, agent_id: str) -> FarmerAgent:
        """Mark a Selected agent Withdrawn; their device returns to the pool."""
        with self._lock:
            agent = self.get(agent_id)
            if agent.status is not AgentStatus.SELECTED:
                raise RegistryError(f"agent {agent_id!r} is not Selected")
            agent.status = AgentStatus.WITHDRAWN
            self._freed_device = agent.device_id
            agent.device_id = None
            return agent

    def promote_next(self, region: Zardi) -> FarmerAgent | None:
        """Promote the region's first waitlisted agent to Selected.

        Invoked explicitly after a withdrawal; returns None when the
        region's waitlist is empty.
        """
        with self._lock:
            for agent_id in self._waitlist_order:
                agent = self._agents[agent_id]
                if agent.region is region and agent.status is AgentStatus.WAITLISTED:
                    agent.status = AgentStatus.SELECTED
                    agent.device_id = self._freed_device
                    self._freed_device = None
                    return agent
            return None

    def elect_district_leader(self, district: str, votes: dict[str, str]) -> str:
        """Plurality election; ties break on the lowest agent id.

        Voters and votees must be Selected agents of the district. The
        winner replaces any previous leader for that district.
        """
        if not votes:
            raise NoVotes(f"no votes cast in district {district!r}")
        with self._lock:
            for voter, votee in votes.items():
                for agent_id in (voter, votee):
                    agent = self.get(agent_id)
                    if agent.status is not AgentStatus.SELECTED:
                        raise RegistryError(f"agent {agent_id!r} is not Selected")
                    if agent.profile.district != district:
                        raise RegistryError(
                            f"agent {agent_id!r} is not in district {district!r}"
                        )
            tally: dict[str, int] = {}
            for votee in votes.values():
                tally[votee] = tally.get(votee, 0) + 1
            top = max(tally.values())
            winner = min(
                (agent_id for agent_id, n in tally.items() if n == top),
                key=lambda s: s.encode(),
            )
            for agent in self._agents.values():
                if agent.profile.district == district:
                    agent.is_district_leader = agent.agent_id == winner
            return winner

    # -- serialization ------------------------------------------------------

    def export_jsonl(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for agent in self.agents():
                fh.write(agent_to_json(agent) + "\n")

    @classmethod
    def import_jsonl(cls, path: str | Path) -> "Registry":
        registry = cls()
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    registry.add(agent_from_json(line))
        return registry


def agent_to_json(agent: FarmerAgent) -> str:
    profile = agent.profile
    payload = {
        "agent_id": agent.agent_id,
        "status": agent.status.value,
        "device_id": agent.device_id,
        "mobile_money_account": agent.mobile_money_account,
        "age_group": agent.age_group.value if agent.age_group else None,
        "is_district_leader": agent.is_district_leader,
        "profile": {
            "candidate_id": profile.candidate_id,
            "name": profile.name,
            "zardi": profile.region.zardi.value,
            "region_label": profile.region.label,
            "district": profile.district,
            "gender": profile.gender.value,
            "age": profile.age,
            "acreage": profile.acreage,
            "in_farmers_group": profile.in_farmers_group,
            "education_primary_or_above": profile.education_primary_or_above,
            "owns_functional_phone": profile.owns_functional_phone,
            "has_mobile_money": profile.has_mobile_money,
            "literate": profile.literate,
            "has_charging_access": profile.has_charging_access,
            "spouse_informed": profile.spouse_informed,
            "has_id_or_lc_letter": profile.has_id_or_lc_letter,
            "producer_scale": profile.producer_scale.value,
        },
    }
    return json.dumps(payload, separators=(",", ":"), ensure_ascii=False)


def agent_from_json(line: str) -> FarmerAgent:
    payload = json.loads(line)
    p = payload["profile"]
    profile = CandidateProfile(
        candidate_id=p["candidate_id"],
        name=p["name"],
        region=RegionId.of(Zardi(p["zardi"])),
        district=p["district"],
        gender=Gender(p["gender"]),
        age=int(p["age"]),
        acreage=float(p["acreage"]),
        in_farmers_group=p["in_farmers_group"],
        education_primary_or_above=p["education_primary_or_above"],
        owns_functional_phone=p["owns_functional_phone"],
        has_mobile_money=p["has_mobile_money"],
        literate=p["literate"],
        has_charging_access=p["has_charging_access"],
        spouse_informed=p["spouse_informed"],
        has_id_or_lc_letter=p["has_id_or_lc_letter"],
        producer_scale=ProducerScale(p["producer_scale"]),
    )
    return FarmerAgent(
        agent_id=payload["agent_id"],
        profile=profile,
        status=AgentStatus(payload["status"]),
        mobile_money_account=payload["mobile_money_account"],
        device_id=payload.get("device_id"),
        is_district_leader=payload.get("is_district_leader", False),
    )


# -- candidate CSV interchange ----------------------------------------------

CSV_COLUMNS = [
    "candidate_id",
    "name",
    "zardi",
    "district",
    "gender",
    "age",
    "acreage",
    "in_farmers_group",
    "education_primary_or_above",
    "owns_functional_phone",
    "has_mobile_money",
    "literate",
    "has_charging_access",
    "spouse_informed",
    "has_id_or_lc_letter",
    "producer_scale",
]

_BOOL_COLUMNS = CSV_COLUMNS[7:15]


def _parse_bool(value: str, column: str, row_number: int) -> bool:
    v = value.strip().lower()
    if v == "yes":
        return True
    if v == "no":
        return False
    raise MalformedProfile(
        f"row {row_number}: column {column!r} must be yes/no, got {value!r}"
    )


def read_candidates_csv(source: str | Path | io.TextIOBase) -> list[CandidateProfile]:
    """Parse the roster import CSV; raises MalformedProfile with a row number."""
    if isinstance(source, (str, Path)):
        fh = open(source, "r", encoding="utf-8", newline="")
        close = True
    else:
        fh, close = source, False
    try:
        reader = csv.DictReader(fh)
        missing = [c for c in CSV_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise MalformedProfile(f"header is missing columns: {missing}")
        candidates = []
        for row_number, row in enumerate(reader, start=2):
            try:
                candidates.append(_candidate_from_row(row, row_number))
            except (KeyError, ValueError) as exc:
                raise MalformedProfile(f"row {row_number}: {exc}") from exc
        return candidates
    finally:
        if close:
            fh.close()


def _candidate_from_row(row: dict[str, str], row_number: int) -> CandidateProfile:
    for column in CSV_COLUMNS:
        if row.get(column) in (None, ""):
            raise MalformedProfile(f"row {row_number}: column {column!r} is empty")
    bools = {c: _parse_bool(row[c], c, row_number) for c in _BOOL_COLUMNS}
    return CandidateProfile(
        candidate_id=row["candidate_id"],
        name=row["name"],
        region=RegionId.of(Zardi(row["zardi"])),
        district=row["district"],
        gender=Gender(row["gender"]),
        age=int(row["age"]),
        acreage=float(row["acreage"]),
        producer_scale=ProducerScale(row["producer_scale"]),
        **bools,
    )


def write_candidates_csv(
    candidates: Iterable[CandidateProfile], path: str | Path
) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for c in candidates:
            writer.writerow(
                [
                    c.candidate_id,
                    c.name,
                    c.region.zardi.value,
                    c.district,
                    c.gender.value,
                    c.age,
                    f"{c.acreage:g}",
                ]
                + ["yes" if getattr(c, col) else "no" for col in _BOOL_COLUMNS]
                + [c.producer_scale.value]
            )


def read_quotas_json(path: str | Path) -> list[RegionQuota]:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    quotas = []
    for entry in data:
        targets = entry.get("per_district_targets", {})
        quotas.append(
            RegionQuota(
                region=Zardi(entry["zardi"]),
                devices=int(entry.get("devices", 40)),
                female_target=int(targets.get("female", 2)),
                male_target=int(targets.get("male", 2)),
                youth_target=int(targets.get("youth", 2)),
            )
        )
    return quotas


def write_quotas_json(quotas: Iterable[RegionQuota], path: str | Path) -> None:
    data = [
        {
            "zardi": q.region.value,
            "devices": q.devices,
            "per_district_targets": {
                "female": q.female_target,
                "male": q.male_target,
                "youth": q.youth_target,
            },
        }
        for q in quotas
    ]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")
