"""Tabular-to-text conversion: encoded rows back to natural-language
sentences, one chunk per selected question, for downstream language-model use.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .data import CLASS_NAMES, Dataset, Schema


@dataclass(frozen=True)
class MappingEntry:
    """Template with one ``{}`` slot plus value-to-phrase map.

    ``phrases`` is None for numeric columns: the value itself is formatted
    into the slot.
    """

    template: str
    phrases: Optional[dict[int, str]] = None

    def __post_init__(self) -> None:
        if self.template.count("{}") != 1:
            raise ValueError(
                f"template {self.template!r} must contain exactly one {{}} slot"
            )

    def phrase_for(self, value: float) -> str:
        if self.phrases is None:
            return str(int(value)) if float(value).is_integer() else repr(float(value))
        key = int(value)
        if float(value) != key or key not in self.phrases:
            raise ValueError(f"no phrase mapped for value {value!r}")
        return self.phrases[key]

    def value_for(self, phrase: str) -> float:
        if self.phrases is None:
            return float(phrase)
        for value, p in self.phrases.items():
            if p == phrase:
                return float(value)
        raise ValueError(f"phrase {phrase!r} not found in mapping")

    def render(self, value: float) -> str:
        return self.template.format(self.phrase_for(value))


@dataclass(frozen=True)
class MappingTable:
    """Per-feature templates and phrase maps, in questionnaire order."""

    entries: dict[str, MappingEntry]

    @property
    def codes(self) -> tuple[str, ...]:
        return tuple(self.entries)

    def to_dict(self) -> dict:
        return {
            code: {
                "template": e.template,
                "phrases": None if e.phrases is None
                else {str(k): v for k, v in e.phrases.items()},
            }
            for code, e in self.entries.items()
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MappingTable":
        entries = {}
        for code, spec in d.items():
            phrases = spec.get("phrases")
            entries[code] = MappingEntry(
                template=spec["template"],
                phrases=None if phrases is None
                else {int(k): v for k, v in phrases.items()},
            )
        return cls(entries)

    @classmethod
    def from_file(cls, path: str | Path) -> "MappingTable":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def to_file(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n",
                              encoding="utf-8")


def build_default_mapping(schema: Schema) -> MappingTable:
    """Generic mapping: category names as phrases, prompts as templates."""
    entries = {}
    for col in schema.feature_columns:
        prompt = col.prompt or col.code
        template = f"Their answer to '{prompt}' is {{}}."
        if col.kind == "ordinal":
            phrases = {i: cat.lower() for i, cat in enumerate(col.categories)}
            entries[col.code] = MappingEntry(template, phrases)
        else:
            entries[col.code] = MappingEntry(template, None)
    return MappingTable(entries)


def validate_mapping(table: MappingTable, questionnaire: Schema) -> list[str]:
    """Diagnostic check of a mapping against a questionnaire schema.

    Reports missing codes, ordinal values without a phrase, and duplicate
    templates. An empty list means the mapping is complete.
    """
    issues: list[str] = []
    for col in questionnaire.feature_columns:
        entry = table.entries.get(col.code)
        if entry is None:
            issues.append(f"missing mapping for code {col.code!r}")
            continue
        if col.kind == "ordinal":
            if entry.phrases is None:
                issues.append(
                    f"code {col.code!r}: ordinal column has no phrase map"
                )
                continue
            for value in range(len(col.categories)):
                if value not in entry.phrases:
                    issues.append(
                        f"code {col.code!r}: no phrase for value {value}"
                    )
    templates: dict[str, str] = {}
    for code, entry in table.entries.items():
        if entry.template in templates:
            issues.append(
                f"duplicate template shared by {templates[entry.template]!r} "
                f"and {code!r}"
            )
        else:
            templates[entry.template] = code
    return issues


@dataclass(frozen=True)
class TextRecord:
    """One generated sentence with its class label."""

    sentence: str
    label: str  # Content | Discontent
    row_id: int

    def to_dict(self) -> dict:
        return {"row_id": self.row_id, "sentence": self.sentence,
                "label": self.label}


def render_sentence(
    row: dict[str, float],
    table: MappingTable,
    label: Optional[int] = None,
    row_id: int = 0,
    order: Optional[Sequence[str]] = None,
) -> TextRecord:
    """Concatenate one chunk per mapped feature, joined by single spaces."""
    codes = list(order) if order is not None else list(table.codes)
    chunks = []
    for code in codes:
        if code not in table.entries:
            raise KeyError(f"no mapping entry for code {code!r}")
        if code not in row:
            raise KeyError(f"row has no value for code {code!r}")
        chunks.append(table.entries[code].render(row[code]))
    sentence = " ".join(chunks)
    if not sentence:
        raise ValueError("rendered an empty sentence")
    return TextRecord(
        sentence=sentence,
        label=CLASS_NAMES[label] if label is not None else "",
        row_id=row_id,
    )


def render_dataset(ds: Dataset, table: MappingTable) -> list[TextRecord]:
    if ds.labels is None:
        raise ValueError("text export needs a labeled dataset")
    if ds.missing_mask.any():
        raise ValueError("impute missing cells before rendering sentences")
    codes = ds.feature_codes
    records = []
    for i in range(ds.n_rows):
        row = {code: float(ds.values[i, j]) for j, code in enumerate(codes)}
        records.append(
            render_sentence(row, table, label=int(ds.labels[i]), row_id=i,
                            order=codes)
        )
    return records


def export_text(ds: Dataset, table: MappingTable, path: str | Path) -> int:
    """Write one JSON record per row (sentence, label, row_id); returns count."""
    records = render_dataset(ds, table)
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record.to_dict()) + "\n")
    return len(records)


def load_text_records(path: str | Path) -> list[TextRecord]:
    records = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            d = json.loads(line)
            records.append(TextRecord(d["sentence"], d["label"], d["row_id"]))
    return records
