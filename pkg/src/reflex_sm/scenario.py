"""Schemas, matching scenarios and ground-truth mappings, plus the bundled benchmarks.

A scenario file is a single UTF-8 JSON document:

    {
      "name": str,
      "source": [{"id": str, "name": str}, ...],
      "target": [{"id": str, "name": str}, ...],
      "expected": [["srcId", "tgtId"], ...],
      "band": "low" | "medium" | "high",
      "description": str            # optional
    }

Unknown keys are rejected. The three bundled scenarios (Person, Order,
Travel) ship as data files under ``reflex_sm/fixtures`` and are loaded
through the same code path as user files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path

from .similarity import levenshtein_similarity


class ParseError(ValueError):
    """The file is not a well-formed scenario document."""


class ValidationError(ValueError):
    """The document parsed but violates a scenario invariant."""


class Side(str, Enum):
    SOURCE = "source"
    TARGET = "target"


class HeterogeneityBand(str, Enum):
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"


@dataclass(frozen=True)
class SchemaElement:
    """One attribute of a schema; `id` is the stable handle, `name` the label text."""

    id: str
    name: str
    side: Side

    def __post_init__(self) -> None:
        if not self.id:
            raise ValidationError("element id must be non-empty")
        if not self.name.strip():
            raise ValidationError(f"element {self.id!r}: name must be non-empty")


@dataclass(frozen=True)
class Schema:
    label: str
    elements: tuple[SchemaElement, ...]

    def __post_init__(self) -> None:
        if not self.elements:
            raise ValidationError(f"schema {self.label!r}: element list is empty")
        sides = {e.side for e in self.elements}
        if len(sides) > 1:
            raise ValidationError(f"schema {self.label!r}: elements mix sides {sorted(s.value for s in sides)}")
        seen: set[str] = set()
        for e in self.elements:
            if e.id in seen:
                raise ValidationError(f"schema {self.label!r}: duplicate element id {e.id!r}")
            seen.add(e.id)

    @property
    def side(self) -> Side:
        return self.elements[0].side

    @property
    def ids(self) -> frozenset[str]:
        return frozenset(e.id for e in self.elements)

    def __len__(self) -> int:
        return len(self.elements)


@dataclass(frozen=True)
class GroundTruthMapping:
    """The user-expected correspondences; strictly 1:1."""

    pairs: frozenset[tuple[str, str]]

    def __post_init__(self) -> None:
        sources = [s for s, _ in self.pairs]
        targets = [t for _, t in self.pairs]
        if len(set(sources)) != len(sources):
            dup = sorted(s for s in set(sources) if sources.count(s) > 1)
            raise ValidationError(f"expected mapping: source id(s) {dup} appear in more than one pair")
        if len(set(targets)) != len(targets):
            dup = sorted(t for t in set(targets) if targets.count(t) > 1)
            raise ValidationError(f"expected mapping: target id(s) {dup} appear in more than one pair")

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class Scenario:
    """A source schema, a target schema, the expected mapping, and a difficulty band."""

    name: str
    source: Schema
    target: Schema
    expected: GroundTruthMapping
    band: HeterogeneityBand
    description: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        if self.source.side is not Side.SOURCE:
            raise ValidationError(f"scenario {self.name!r}: source schema has side {self.source.side.value!r}")
        if self.target.side is not Side.TARGET:
            raise ValidationError(f"scenario {self.name!r}: target schema has side {self.target.side.value!r}")
        for s, t in self.expected.pairs:
            if s not in self.source.ids:
                raise ValidationError(f"expected pair references unknown source id {s!r}")
            if t not in self.target.ids:
                raise ValidationError(f"expected pair references unknown target id {t!r}")

    def element(self, element_id: str) -> SchemaElement:
        for e in self.source.elements + self.target.elements:
            if e.id == element_id:
                return e
        raise KeyError(element_id)


_TOP_KEYS = {"name", "source", "target", "expected", "band"}
_OPTIONAL_KEYS = {"description"}
_ELEMENT_KEYS = {"id", "name"}


def _parse_elements(raw: object, key: str, side: Side) -> tuple[SchemaElement, ...]:
    if not isinstance(raw, list):
        raise ParseError(f"{key!r} must be a list of elements")
    elements = []
    for i, item in enumerate(raw):
        if not isinstance(item, dict):
            raise ParseError(f"{key}[{i}] must be an object")
        unknown = set(item) - _ELEMENT_KEYS
        if unknown:
            raise ParseError(f"{key}[{i}]: unknown key(s) {sorted(unknown)}")
        missing = _ELEMENT_KEYS - set(item)
        if missing:
            raise ParseError(f"{key}[{i}]: missing key(s) {sorted(missing)}")
        if not isinstance(item["id"], str) or not isinstance(item["name"], str):
            raise ParseError(f"{key}[{i}]: 'id' and 'name' must be strings")
        elements.append(SchemaElement(id=item["id"], name=item["name"], side=side))
    return tuple(elements)


def scenario_from_dict(doc: object) -> Scenario:
    """Build a validated Scenario from a parsed scenario document."""
    if not isinstance(doc, dict):
        raise ParseError("scenario document must be a JSON object")
    unknown = set(doc) - _TOP_KEYS - _OPTIONAL_KEYS
    if unknown:
        raise ParseError(f"unknown top-level key(s) {sorted(unknown)}")
    missing = _TOP_KEYS - set(doc)
    if missing:
        raise ParseError(f"missing top-level key(s) {sorted(missing)}")
    if not isinstance(doc["name"], str) or not doc["name"]:
        raise ParseError("'name' must be a non-empty string")
    try:
        band = HeterogeneityBand(doc["band"])
    except ValueError:
        raise ParseError(f"'band' must be one of low|medium|high, got {doc['band']!r}") from None
    description = doc.get("description", "")
    if not isinstance(description, str):
        raise ParseError("'description' must be a string")

    source = Schema(label=f"{doc['name']}/source", elements=_parse_elements(doc["source"], "source", Side.SOURCE))
    target = Schema(label=f"{doc['name']}/target", elements=_parse_elements(doc["target"], "target", Side.TARGET))

    raw_expected = doc["expected"]
    if not isinstance(raw_expected, list):
        raise ParseError("'expected' must be a list of [sourceId, targetId] pairs")
    pairs = []
    for i, item in enumerate(raw_expected):
        if not (isinstance(item, (list, tuple)) and len(item) == 2
                and all(isinstance(x, str) for x in item)):
            raise ParseError(f"expected[{i}] must be a pair of id strings")
        pairs.append((item[0], item[1]))
    expected = GroundTruthMapping(pairs=frozenset(pairs))

    return Scenario(
        name=doc["name"],
        source=source,
        target=target,
        expected=expected,
        band=band,
        description=description,
    )


def scenario_to_dict(scenario: Scenario) -> dict:
    """Serialize back to the scenario file format (round-trips through the loader)."""
    doc: dict = {
        "name": scenario.name,
        "source": [{"id": e.id, "name": e.name} for e in scenario.source.elements],
        "target": [{"id": e.id, "name": e.name} for e in scenario.target.elements],
        "expected": [[s, t] for s, t in sorted(scenario.expected.pairs)],
        "band": scenario.band.value,
    }
    if scenario.description:
        doc["description"] = scenario.description
    return doc


def load_scenario(path: str | Path) -> Scenario:
    """Load and validate one scenario file."""
    text = Path(path).read_text(encoding="utf-8")
    return _loads(text)


def _loads(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc}") from exc
    return scenario_from_dict(doc)


FIXTURE_NAMES = ("Person", "Order", "Travel")


def builtin_fixtures() -> list[Scenario]:
    """The three bundled benchmark scenarios, in canonical order."""
    return [builtin_fixture(name) for name in FIXTURE_NAMES]


def builtin_fixture(name: str) -> Scenario:
    """Look up one bundled scenario by case-insensitive name."""
    key = name.strip().lower()
    if key.capitalize() not in FIXTURE_NAMES:
        raise KeyError(f"no bundled scenario named {name!r} (have: {', '.join(FIXTURE_NAMES)})")
    data = resources.files("reflex_sm").joinpath(f"fixtures/{key}.json").read_text(encoding="utf-8")
    return _loads(data)


def heterogeneity_index(scenario: Scenario) -> float:
    """How lexically far apart the paired names are, in [0, 1].

    One minus the mean normalized Levenshtein similarity between the
    lowercased raw names of each expected pair. Bands map as
    low <= 0.25 < medium <= 0.50 < high.
    """
    by_id = {e.id: e for e in scenario.source.elements + scenario.target.elements}
    if not scenario.expected.pairs:
        return 0.0
    total = 0.0
    for s, t in scenario.expected.pairs:
        total += levenshtein_similarity(by_id[s].name.lower(), by_id[t].name.lower())
    return 1.0 - total / len(scenario.expected.pairs)


def band_for_index(index: float) -> HeterogeneityBand:
    if index <= 0.25:
        return HeterogeneityBand.LOW
    if index <= 0.50:
        return HeterogeneityBand.MEDIUM
    return HeterogeneityBand.HIGH
