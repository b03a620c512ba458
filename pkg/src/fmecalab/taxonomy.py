"""Versioned failure-mode taxonomy: hierarchy, validation, merge maps.

A taxonomy is a strict three-level hierarchy (category -> subcategory ->
failure mode) frozen per version. Two versions ship with the package as
JSON datasets; annotations recorded against an older version migrate to a
newer one through a merge map. All values are immutable after load and
safe to share across threads.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import MappingError, NotFoundError, SchemaError

SHIPPED_VERSIONS = (1, 3)


@dataclass(frozen=True)
class Category:
    id: str
    label: str


@dataclass(frozen=True)
class Subcategory:
    id: str
    label: str
    category_id: str


@dataclass(frozen=True)
class FailureMode:
    id: str
    label: str
    description: str
    illustrative_examples: tuple[str, ...]
    subcategory_id: str


@dataclass(frozen=True)
class Violation:
    """One invariant breach found by validate_taxonomy."""

    code: str
    node_id: str
    message: str


@dataclass(frozen=True)
class Taxonomy:
    version: int
    categories: tuple[Category, ...]
    subcategories: tuple[Subcategory, ...]
    failure_modes: tuple[FailureMode, ...]
    provenance: str = ""
    _by_category: dict = field(default_factory=dict, compare=False, repr=False)
    _by_subcategory: dict = field(default_factory=dict, compare=False, repr=False)
    _by_mode: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        self._by_category.update({c.id: c for c in self.categories})
        self._by_subcategory.update({s.id: s for s in self.subcategories})
        self._by_mode.update({m.id: m for m in self.failure_modes})

    def category(self, category_id: str) -> Category:
        try:
            return self._by_category[category_id]
        except KeyError:
            raise NotFoundError(f"unknown category {category_id!r}", id=category_id) from None

    def subcategory(self, subcategory_id: str) -> Subcategory:
        try:
            return self._by_subcategory[subcategory_id]
        except KeyError:
            raise NotFoundError(f"unknown subcategory {subcategory_id!r}",
                                id=subcategory_id) from None

    def failure_mode(self, mode_id: str) -> FailureMode:
        try:
            return self._by_mode[mode_id]
        except KeyError:
            raise NotFoundError(f"unknown failure mode {mode_id!r}", id=mode_id) from None

    def failure_mode_ids(self) -> tuple[str, ...]:
        return tuple(m.id for m in self.failure_modes)

    def subcategory_ids(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.subcategories)

    def modes_of_subcategory(self, subcategory_id: str) -> tuple[FailureMode, ...]:
        self.subcategory(subcategory_id)
        return tuple(m for m in self.failure_modes if m.subcategory_id == subcategory_id)

    def subcategories_of_category(self, category_id: str) -> tuple[Subcategory, ...]:
        self.category(category_id)
        return tuple(s for s in self.subcategories if s.category_id == category_id)


@dataclass(frozen=True)
class MergeMap:
    """Re-expresses one taxonomy version's failure-mode ids in another's.

    ``mapping`` must be total over the source version's ids. ``inferred``
    marks source ids whose destination is an editorial choice rather than a
    documented consolidation.
    """

    from_version: int
    to_version: int
    mapping: dict[str, str]
    inferred: frozenset[str] = frozenset()
    notes: str = ""


def validate_taxonomy(t: Taxonomy) -> list[Violation]:
    """List every invariant violation; an empty list means the taxonomy is valid."""
    violations: list[Violation] = []

    def add(code, node_id, message):
        violations.append(Violation(code, node_id, message))

    if t.version < 1:
        add("bad_version", str(t.version), f"taxonomy version must be >= 1, got {t.version}")

    seen = set()
    for c in t.categories:
        if c.id in seen:
            add("duplicate_category", c.id, f"duplicate category id {c.id!r}")
        seen.add(c.id)
        if not c.label.strip():
            add("empty_label", c.id, f"category {c.id!r} has an empty label")

    category_ids = {c.id for c in t.categories}
    seen = set()
    for s in t.subcategories:
        if s.id in seen:
            add("duplicate_subcategory", s.id, f"duplicate subcategory id {s.id!r}")
        seen.add(s.id)
        if not s.label.strip():
            add("empty_label", s.id, f"subcategory {s.id!r} has an empty label")
        if s.category_id not in category_ids:
            add("orphan_subcategory", s.id,
                f"subcategory {s.id!r} references unknown category {s.category_id!r}")

    populated = {s.category_id for s in t.subcategories}
    for c in t.categories:
        if c.id not in populated:
            add("childless_category", c.id, f"category {c.id!r} has no subcategories")

    subcategory_ids = {s.id for s in t.subcategories}
    seen = set()
    for m in t.failure_modes:
        if m.id in seen:
            add("duplicate_failure_mode", m.id, f"duplicate failure mode id {m.id!r}")
        seen.add(m.id)
        if not m.label.strip():
            add("empty_label", m.id, f"failure mode {m.id!r} has an empty label")
        if m.subcategory_id not in subcategory_ids:
            add("orphan_failure_mode", m.id,
                f"failure mode {m.id!r} references unknown subcategory {m.subcategory_id!r}")

    covered = {m.subcategory_id for m in t.failure_modes}
    for s in t.subcategories:
        if s.id not in covered:
            add("childless_subcategory", s.id, f"subcategory {s.id!r} has no failure modes")

    if not t.failure_modes:
        add("no_failure_modes", "", "taxonomy contains no failure modes")

    return violations


def _taxonomy_from_dict(doc: dict, origin: str) -> Taxonomy:
    try:
        return Taxonomy(
            version=int(doc["version"]),
            provenance=str(doc.get("provenance", "")),
            categories=tuple(Category(c["id"], c["label"]) for c in doc["categories"]),
            subcategories=tuple(
                Subcategory(s["id"], s["label"], s["category_id"])
                for s in doc["subcategories"]),
            failure_modes=tuple(
                FailureMode(m["id"], m["label"], m.get("description", ""),
                            tuple(m.get("illustrative_examples", ())), m["subcategory_id"])
                for m in doc["failure_modes"]),
        )
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"malformed taxonomy document {origin}: {exc}", file=origin) from exc


def _merge_map_from_dict(doc: dict, origin: str) -> MergeMap:
    try:
        return MergeMap(
            from_version=int(doc["from_version"]),
            to_version=int(doc["to_version"]),
            mapping=dict(doc["mapping"]),
            inferred=frozenset(doc.get("inferred", ())),
            notes=str(doc.get("notes", "")),
        )
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"malformed merge map document {origin}: {exc}", file=origin) from exc


def load_taxonomy(path: str | Path) -> Taxonomy:
    """Load a taxonomy from a user-supplied JSON file (same schema as shipped)."""
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        return _taxonomy_from_dict(json.load(fh), str(path))


def load_merge_map(path: str | Path) -> MergeMap:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        return _merge_map_from_dict(json.load(fh), str(path))


_cache: dict[int, Taxonomy] = {}


def default_taxonomy(version: int) -> Taxonomy:
    """Return a shipped taxonomy dataset (versions 1 and 3)."""
    if version not in SHIPPED_VERSIONS:
        raise NotFoundError(
            f"no shipped taxonomy version {version}; available: {list(SHIPPED_VERSIONS)}",
            version=version, available=list(SHIPPED_VERSIONS))
    if version not in _cache:
        name = f"taxonomy_v{version}.json"
        doc = json.loads(resources.files("fmecalab.data").joinpath(name).read_text("utf-8"))
        _cache[version] = _taxonomy_from_dict(doc, name)
    return _cache[version]


def default_merge_map(from_version: int = 1, to_version: int = 3) -> MergeMap:
    """Return the shipped merge map between taxonomy versions."""
    if (from_version, to_version) != (1, 3):
        raise NotFoundError(
            f"no shipped merge map {from_version}->{to_version}; available: 1->3",
            from_version=from_version, to_version=to_version)
    name = "merge_v1_to_v3.json"
    doc = json.loads(resources.files("fmecalab.data").joinpath(name).read_text("utf-8"))
    return _merge_map_from_dict(doc, name)


def migrate_flags(flags: dict[str, bool], m: MergeMap) -> dict[str, bool]:
    """Re-key presence flags through a merge map.

    A target id is flagged iff any of its sources was flagged, so detections
    survive consolidation of several modes into one.
    """
    out: dict[str, bool] = {}
    for source_id, value in flags.items():
        if source_id not in m.mapping:
            raise MappingError(
                f"failure mode {source_id!r} has no entry in merge map "
                f"{m.from_version}->{m.to_version}", id=source_id)
        target = m.mapping[source_id]
        out[target] = out.get(target, False) or bool(value)
    return out


def subcategory_of(fm_id: str, t: Taxonomy) -> Subcategory:
    """The unique subcategory owning a failure mode."""
    mode = t.failure_mode(fm_id)
    return t.subcategory(mode.subcategory_id)


def compose_merge_maps(first: MergeMap, second: MergeMap) -> MergeMap:
    """Chain two merge maps (first.from_version -> second.to_version)."""
    if first.to_version != second.from_version:
        raise MappingError(
            f"cannot compose merge map {first.from_version}->{first.to_version} "
            f"with {second.from_version}->{second.to_version}")
    mapping = {}
    for source_id, mid in first.mapping.items():
        if mid not in second.mapping:
            raise MappingError(
                f"intermediate id {mid!r} missing from merge map "
                f"{second.from_version}->{second.to_version}", id=mid)
        mapping[source_id] = second.mapping[mid]
    return MergeMap(first.from_version, second.to_version, mapping,
                    inferred=first.inferred | second.inferred)


def identity_merge_map(t: Taxonomy) -> MergeMap:
    """Merge map from a taxonomy version onto itself."""
    return MergeMap(t.version, t.version, {m.id: m.id for m in t.failure_modes})
