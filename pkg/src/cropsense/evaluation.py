"""Farmer-diagnosis scoring against expert ground truth.

Free-text farmer comments are categorised against a 30-keyword lexicon
(with spelling-variant tables shipped as editable JSON), reduced to a
primary diagnosis by a configurable rule table, and compared to expert
annotations through a 5x5 actual-vs-predicted confusion matrix with
per-class precision/recall.
"""

from __future__ import annotations

import csv
import json
import re
import unicodedata
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

__all__ = [
    "DiagnosisLabel",
    "MATRIX_LABEL_ORDER",
    "KeywordLexicon",
    "DiagnosisRules",
    "ConfusionMatrix",
    "ClassMetrics",
    "CorpusEvaluation",
    "extract_keywords",
    "primary_diagnosis",
    "confusion_matrix",
    "precision_recall",
    "evaluate_corpus",
    "load_lexicon",
    "load_rules",
]


class DiagnosisLabel(str, Enum):
    """The four target cassava diagnoses plus the no-diagnosis class."""

    CMD = "CMD"
    CBSD = "CBSD"
    CBB = "CBB"
    CGM = "CGM"
    NONE = "None"


# Row/column order used by matrix exports and column-sum reporting.
MATRIX_LABEL_ORDER: tuple[DiagnosisLabel, ...] = (
    DiagnosisLabel.CBB,
    DiagnosisLabel.CBSD,
    DiagnosisLabel.CGM,
    DiagnosisLabel.CMD,
    DiagnosisLabel.NONE,
)

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def _normalize_tokens(text: str) -> list[str]:
    """Case-fold, strip diacritics and punctuation, return word tokens."""
    folded = unicodedata.normalize("NFKD", text).casefold()
    stripped = "".join(ch for ch in folded if not unicodedata.combining(ch))
    return _TOKEN_RE.findall(stripped)


class LexiconError(ValueError):
    """Raised for malformed lexicon or rule-table data files."""


@dataclass(frozen=True)
class KeywordLexicon:
    """Ordered keyword identifiers, each with a set of surface-form variants.

    Variants are stored normalized (token tuples); a variant may span
    several tokens ("white fly"). Every variant maps to exactly one keyword.
    """

    keywords: tuple[str, ...]
    variants: Mapping[tuple[str, ...], str]  # token tuple -> keyword

    @classmethod
    def from_dict(cls, data: dict) -> "KeywordLexicon":
        keywords: list[str] = []
        variants: dict[tuple[str, ...], str] = {}
        for entry in data["keywords"]:
            kw = entry["keyword"]
            if kw in keywords:
                raise LexiconError(f"duplicate keyword: {kw}")
            keywords.append(kw)
            for raw in entry["variants"]:
                tokens = tuple(_normalize_tokens(raw))
                if not tokens:
                    raise LexiconError(f"empty variant for keyword {kw!r}")
                owner = variants.get(tokens)
                if owner is not None and owner != kw:
                    raise LexiconError(
                        f"variant {raw!r} maps to both {owner!r} and {kw!r}"
                    )
                variants[tokens] = kw
        return cls(keywords=tuple(keywords), variants=variants)

    def empty_vector(self) -> dict[str, int]:
        return {kw: 0 for kw in self.keywords}


@dataclass(frozen=True)
class DiagnosisRules:
    """Configurable mapping from keyword vectors to a primary diagnosis.

    Explicit disease keywords win in priority order; otherwise the first
    symptom rule whose conjunction groups match decides; otherwise None.
    """

    disease_priority: tuple[str, ...]
    keyword_to_diagnosis: Mapping[str, DiagnosisLabel]
    symptom_rules: tuple[tuple[DiagnosisLabel, tuple[tuple[str, ...], ...]], ...]

    @classmethod
    def from_dict(cls, data: dict) -> "DiagnosisRules":
        mapping = {
            kw: DiagnosisLabel(label)
            for kw, label in data["keyword_to_diagnosis"].items()
        }
        rules = tuple(
            (
                DiagnosisLabel(rule["diagnosis"]),
                tuple(tuple(group) for group in rule["when"]),
            )
            for rule in data["symptom_rules"]
        )
        return cls(
            disease_priority=tuple(data["disease_priority"]),
            keyword_to_diagnosis=mapping,
            symptom_rules=rules,
        )


def _load_packaged(name: str) -> dict:
    with resources.files("cropsense.data").joinpath(name).open("r", encoding="utf-8") as fh:
        return json.load(fh)


def load_lexicon(path: str | Path | None = None) -> KeywordLexicon:
    """Load a lexicon JSON file, or the packaged default when path is None."""
    if path is None:
        return KeywordLexicon.from_dict(_load_packaged("lexicon.json"))
    with open(path, "r", encoding="utf-8") as fh:
        return KeywordLexicon.from_dict(json.load(fh))


def load_rules(path: str | Path | None = None) -> DiagnosisRules:
    """Load a diagnosis rule table, or the packaged default when path is None."""
    if path is None:
        return DiagnosisRules.from_dict(_load_packaged("diagnosis_rules.json"))
    with open(path, "r", encoding="utf-8") as fh:
        return DiagnosisRules.from_dict(json.load(fh))


def extract_keywords(comment: str, lexicon: KeywordLexicon) -> dict[str, int]:
    """Encode a comment as a 0/1 vector over the lexicon's keywords.

    The comment is treated as a bag of normalized tokens; multi-token
    variants claim their tokens before single-token variants, so
    "not healthy" never also fires "healthy".
    """
    vector = lexicon.empty_vector()
    if not comment:
        return vector

    bag: dict[str, int] = {}
    for token in _normalize_tokens(comment):
        bag[token] = bag.get(token, 0) + 1

    ordered = sorted(
        lexicon.variants.items(), key=lambda item: (-len(item[0]), item[1], item[0])
    )
    for tokens, keyword in ordered:
        needed: dict[str, int] = {}
        for tok in tokens:
            needed[tok] = needed.get(tok, 0) + 1
        if all(bag.get(tok, 0) >= n for tok, n in needed.items()):
            vector[keyword] = 1
            for tok, n in needed.items():
                bag[tok] -= n
    return vector


def primary_diagnosis(
    vector: Mapping[str, int], rules: DiagnosisRules | None = None
) -> DiagnosisLabel:
    """Reduce a keyword vector to the farmer's primary diagnosis."""
    if rules is None:
        rules = load_rules()
    for kw in rules.disease_priority:
        if vector.get(kw, 0):
            return rules.keyword_to_diagnosis[kw]
    for label, groups in rules.symptom_rules:
        for group in groups:
            if all(vector.get(kw, 0) for kw in group):
                return label
    return DiagnosisLabel.NONE


@dataclass
class ConfusionMatrix:
    """5x5 integer counts: rows = actual (expert), columns = predicted (farmer)."""

    counts: dict[tuple[DiagnosisLabel, DiagnosisLabel], int] = field(default_factory=dict)

    def cell(self, actual: DiagnosisLabel, predicted: DiagnosisLabel) -> int:
        return self.counts.get((actual, predicted), 0)

    def add(self, actual: DiagnosisLabel, predicted: DiagnosisLabel, n: int = 1) -> None:
        if n < 0:
            raise ValueError("counts must be non-negative")
        self.counts[(actual, predicted)] = self.cell(actual, predicted) + n

    def row_sum(self, actual: DiagnosisLabel) -> int:
        return sum(self.cell(actual, p) for p in MATRIX_LABEL_ORDER)

    def col_sum(self, predicted: DiagnosisLabel) -> int:
        return sum(self.cell(a, predicted) for a in MATRIX_LABEL_ORDER)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def trace(self) -> int:
        return sum(self.cell(lbl, lbl) for lbl in MATRIX_LABEL_ORDER)

    def accuracy(self) -> float:
        return self.trace / self.total if self.total else 0.0

    def merge(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        """Cell-wise addition; associative and commutative for shard merges."""
        merged = ConfusionMatrix(counts=dict(self.counts))
        for key, n in other.counts.items():
            merged.counts[key] = merged.counts.get(key, 0) + n
        return merged

    def to_csv(self, path: str | Path) -> None:
        """Write the matrix with actual rows, predicted columns, trailing 'all' row."""
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["actual"] + [lbl.value for lbl in MATRIX_LABEL_ORDER])
            for actual in MATRIX_LABEL_ORDER:
                writer.writerow(
                    [actual.value] + [self.cell(actual, p) for p in MATRIX_LABEL_ORDER]
                )
            writer.writerow(["all"] + [self.col_sum(p) for p in MATRIX_LABEL_ORDER])

    @classmethod
    def from_csv(cls, path: str | Path) -> "ConfusionMatrix":
        matrix = cls()
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            predicted = [DiagnosisLabel(h) for h in header[1:]]
            for row in reader:
                if not row or row[0] == "all":
                    continue
                actual = DiagnosisLabel(row[0])
                for pred, value in zip(predicted, row[1:]):
                    n = int(value)
                    if n:
                        matrix.add(actual, pred, n)
        return matrix


def confusion_matrix(
    pairs: Iterable[tuple[DiagnosisLabel, DiagnosisLabel]],
) -> ConfusionMatrix:
    """Tally (actual, predicted) pairs into a confusion matrix."""
    matrix = ConfusionMatrix()
    for actual, predicted in pairs:
        matrix.add(actual, predicted)
    return matrix


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    support: int
    zero_support: bool


def precision_recall(matrix: ConfusionMatrix, label: DiagnosisLabel) -> ClassMetrics:
    """Per-class precision (diagonal/column) and recall (diagonal/row).

    Division by zero yields 0.0; zero_support flags an empty actual row.
    """
    diagonal = matrix.cell(label, label)
    col = matrix.col_sum(label)
    row = matrix.row_sum(label)
    precision = diagonal / col if col else 0.0
    recall = diagonal / row if row else 0.0
    return ClassMetrics(
        precision=precision, recall=recall, support=row, zero_support=row == 0
    )


@dataclass
class CorpusEvaluation:
    matrix: ConfusionMatrix
    per_class: dict[DiagnosisLabel, ClassMetrics]
    counted: int
    available: int

    @property
    def coverage(self) -> float:
        return self.counted / self.available if self.available else 0.0


def evaluate_corpus(
    reports: Iterable,
    lexicon: KeywordLexicon | None = None,
    rules: DiagnosisRules | None = None,
) -> CorpusEvaluation:
    """Score every report that carries both an expert diagnosis and a comment.

    `reports` is any iterable of objects exposing `expert_diagnosis` and
    `comment` (a ReportStore works directly). Coverage is qualified
    reports over all reports in scope.
    """
    if lexicon is None:
        lexicon = load_lexicon()
    if rules is None:
        rules = load_rules()

    matrix = ConfusionMatrix()
    counted = 0
    available = 0
    for report in reports:
        available += 1
        if report.expert_diagnosis is None or not report.comment:
            continue
        counted += 1
        predicted = primary_diagnosis(extract_keywords(report.comment, lexicon), rules)
        matrix.add(report.expert_diagnosis, predicted)

    per_class = {lbl: precision_recall(matrix, lbl) for lbl in MATRIX_LABEL_ORDER}
    return CorpusEvaluation(
        matrix=matrix, per_class=per_class, counted=counted, available=available
    )


def metrics_to_csv(
    per_class: Mapping[DiagnosisLabel, ClassMetrics], path: str | Path
) -> None:
    """Write the per-class metrics CSV that accompanies a matrix export."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["class", "precision", "recall", "support"])
        for label in MATRIX_LABEL_ORDER:
            m = per_class[label]
            writer.writerow([label.value, f"{m.precision:.6f}", f"{m.recall:.6f}", m.support])
