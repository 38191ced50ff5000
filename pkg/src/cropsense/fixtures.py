"""Deterministic reference data for the 2018 cassava surveillance campaign.

Bundles the recruitment-drive roster (246 sourced candidates across the
seven training stations, of whom 175 verify) and the expert-vs-farmer
diagnosis tallies, for use by the test suite and as demo inputs for the
CLI. Everything here is generated arithmetically: no randomness, stable
across runs.
"""

from __future__ import annotations

from .evaluation import DiagnosisLabel, ConfusionMatrix
from .registry import (
    CandidateProfile,
    Gender,
    ProducerScale,
    RegionId,
    RegionQuota,
    Zardi,
    default_quotas,
)

__all__ = [
    "SELECTION_TABLE",
    "REGION_DISTRICTS",
    "REGION_COORDS",
    "reference_candidates",
    "reference_quotas",
    "reference_confusion_counts",
    "reference_confusion_matrix",
    "reference_diagnosis_pairs",
]

# Per station: (districts, selected, male, female, additional ineligible).
SELECTION_TABLE: dict[Zardi, tuple[int, int, int, int, int]] = {
    Zardi.ARUA: (8, 23, 18, 5, 9),
    Zardi.BULINDI: (5, 16, 8, 8, 7),
    Zardi.LIRA: (11, 43, 29, 14, 13),
    Zardi.RWEBITABA: (4, 8, 5, 3, 5),
    Zardi.SOROTI: (10, 32, 20, 12, 14),
    Zardi.TORORO: (3, 17, 9, 8, 8),
    Zardi.WAKISO: (7, 36, 23, 13, 15),
}

REGION_DISTRICTS: dict[Zardi, list[str]] = {
    Zardi.ARUA: ["Arua", "Maracha", "Koboko", "Yumbe", "Moyo", "Adjumani", "Nebbi", "Zombo"],
    Zardi.BULINDI: ["Hoima", "Masindi", "Buliisa", "Kiryandongo", "Kikuube"],
    Zardi.LIRA: [
        "Lira", "Apac", "Kole", "Oyam", "Dokolo", "Alebtong",
        "Otuke", "Amolatar", "Kwania", "Agago", "Pader",
    ],
    Zardi.RWEBITABA: ["Kabarole", "Kyenjojo", "Kamwenge", "Bunyangabu"],
    Zardi.SOROTI: [
        "Soroti", "Kumi", "Serere", "Ngora", "Katakwi",
        "Amuria", "Kaberamaido", "Bukedea", "Pallisa", "Kapelebyong",
    ],
    Zardi.TORORO: ["Tororo", "Busia", "Butaleja"],
    Zardi.WAKISO: ["Wakiso", "Mpigi", "Mukono", "Luweero", "Mityana", "Buikwe", "Kayunga"],
}

# Approximate station coordinates (lat, lon), used as simulation anchors.
REGION_COORDS: dict[Zardi, tuple[float, float]] = {
    Zardi.ARUA: (3.03, 30.91),
    Zardi.BULINDI: (1.43, 31.35),
    Zardi.LIRA: (2.25, 32.90),
    Zardi.RWEBITABA: (0.66, 30.27),
    Zardi.SOROTI: (1.72, 33.61),
    Zardi.TORORO: (0.69, 34.18),
    Zardi.WAKISO: (0.40, 32.46),
}

_MALE_NAMES = [
    "James", "Moses", "Patrick", "Ronald", "Denis",
    "Samuel", "Geoffrey", "Isaac", "Emmanuel", "Robert",
]
_FEMALE_NAMES = [
    "Agnes", "Betty", "Christine", "Esther", "Florence",
    "Grace", "Harriet", "Janet", "Lydia", "Monica",
]
_SURNAMES = [
    "Okello", "Mugisha", "Adong", "Namukasa", "Odongo", "Tumusiime",
    "Apio", "Kato", "Nabirye", "Wasswa", "Byaruhanga", "Achen",
]

_AGES = [23, 34, 42, 55, 28, 37, 47, 60, 25, 31, 50, 20, 39, 44, 58, 26]
_ACREAGES = [0.8, 1.2, 1.5, 2.0, 0.5, 1.0, 1.8]

# Stations whose hard-to-fill districts engaged medium-scale producers.
_MEDIUM_SCALE_SLOTS = {(Zardi.LIRA, 4), (Zardi.SOROTI, 9), (Zardi.WAKISO, 0)}


def _name_for(gender: Gender, i: int) -> str:
    pool = _MALE_NAMES if gender is Gender.MALE else _FEMALE_NAMES
    return f"{pool[i % len(pool)]} {_SURNAMES[i % len(_SURNAMES)]}"


def _eligible_candidate(zardi: Zardi, seq: int, gender: Gender, index: int) -> CandidateProfile:
    districts = REGION_DISTRICTS[zardi]
    medium = (zardi, index) in _MEDIUM_SCALE_SLOTS
    return CandidateProfile(
        candidate_id=f"UG-{zardi.value[:3].upper()}-{seq:03d}",
        name=_name_for(gender, seq),
        region=RegionId.of(zardi),
        district=districts[index % len(districts)],
        gender=gender,
        age=_AGES[(seq + index) % len(_AGES)],
        acreage=3.5 if medium else _ACREAGES[seq % len(_ACREAGES)],
        in_farmers_group=True,
        education_primary_or_above=True,
        owns_functional_phone=True,
        has_mobile_money=True,
        literate=True,
        has_charging_access=True,
        spouse_informed=True,
        has_id_or_lc_letter=True,
        producer_scale=ProducerScale.MEDIUM_SCALE if medium else ProducerScale.SMALLHOLDER,
    )


# Each entry knocks out one criterion for an otherwise-eligible candidate.
_FAILURE_MODES = [
    {"age": 65},
    {"owns_functional_phone": False},
    {"acreage": 0.3},
    {"in_farmers_group": False},
    {"literate": False},
    {"has_charging_access": False},
    {"age": 18},
    {"spouse_informed": False},
    {"has_id_or_lc_letter": False},
    {"education_primary_or_above": False},
    {"has_mobile_money": False},
]


def _ineligible_candidate(zardi: Zardi, seq: int, index: int) -> CandidateProfile:
    gender = Gender.MALE if index % 3 else Gender.FEMALE
    candidate = _eligible_candidate(zardi, seq, gender, index)
    candidate.producer_scale = ProducerScale.SMALLHOLDER
    candidate.acreage = _ACREAGES[seq % len(_ACREAGES)]
    for field_name, value in _FAILURE_MODES[index % len(_FAILURE_MODES)].items():
        setattr(candidate, field_name, value)
    return candidate


def reference_candidates() -> list[CandidateProfile]:
    """The 246-candidate recruitment roster; 175 pass verification."""
    candidates: list[CandidateProfile] = []
    for zardi in Zardi:
        _, select, males, females, ineligible = SELECTION_TABLE[zardi]
        seq = 1
        for index in range(select):
            gender = Gender.FEMALE if index < females else Gender.MALE
            candidates.append(_eligible_candidate(zardi, seq, gender, index))
            seq += 1
        for index in range(ineligible):
            candidates.append(_ineligible_candidate(zardi, seq, index))
            seq += 1
    return candidates


def reference_quotas() -> list[RegionQuota]:
    """The deployment's device quotas: 40 per training station."""
    return default_quotas()


# Expert (actual) rows by predicted column, both in matrix label order
# CBB, CBSD, CGM, CMD, None.
_CONFUSION_ROWS: dict[DiagnosisLabel, tuple[int, int, int, int, int]] = {
    DiagnosisLabel.CBB: (655, 736, 15, 110, 2),
    DiagnosisLabel.CBSD: (124, 572, 37, 74, 4),
    DiagnosisLabel.CGM: (58, 241, 229, 286, 21),
    DiagnosisLabel.CMD: (217, 488, 435, 3072, 76),
    DiagnosisLabel.NONE: (9, 19, 2, 9, 0),
}

_MATRIX_ORDER = (
    DiagnosisLabel.CBB,
    DiagnosisLabel.CBSD,
    DiagnosisLabel.CGM,
    DiagnosisLabel.CMD,
    DiagnosisLabel.NONE,
)


def reference_confusion_counts() -> dict[tuple[DiagnosisLabel, DiagnosisLabel], int]:
    """Expert-reviewed vs farmer-commented diagnosis tallies (7,491 reports)."""
    counts = {}
    for actual, row in _CONFUSION_ROWS.items():
        for predicted, n in zip(_MATRIX_ORDER, row):
            counts[(actual, predicted)] = n
    return counts


def reference_confusion_matrix() -> ConfusionMatrix:
    matrix = ConfusionMatrix()
    for (actual, predicted), n in reference_confusion_counts().items():
        if n:
            matrix.add(actual, predicted, n)
    return matrix


def reference_diagnosis_pairs() -> list[tuple[DiagnosisLabel, DiagnosisLabel]]:
    """The tallies expanded to one (actual, predicted) pair per report."""
    pairs = []
    for actual in _MATRIX_ORDER:
        for predicted, n in zip(_MATRIX_ORDER, _CONFUSION_ROWS[actual]):
            pairs.extend([(actual, predicted)] * n)
    return pairs
