"""Domain types for the three model languages.

CDL describes the conceptual schema (levels, dimensions, hierarchies,
fact relationships), SDL the warehouse store (tables, keys), and MDL the
mapping fragments tying one conceptual entity to one store table.  All
types are immutable after construction; structural and cross-model
checks live in :mod:`cim.validation`.
"""

from __future__ import annotations

import datetime
import decimal
import enum
from dataclasses import dataclass, fields


class Datatype(str, enum.Enum):
    STRING = "string"
    INTEGER = "integer"
    DECIMAL = "decimal"
    DATE = "date"
    BOOLEAN = "boolean"


#: Scalar values carried by relations and condition literals.
Scalar = str | int | decimal.Decimal | datetime.date | bool | None


def coerce_scalar(dtype: Datatype, text: str) -> Scalar:
    """Parse the lexical form of a scalar per its declared datatype.

    Empty text maps to null; this is the CSV and XML convention used
    throughout the store.  Raises ValueError on malformed input.
    """
    if text == "":
        return None
    if dtype is Datatype.STRING:
        return text
    if dtype is Datatype.INTEGER:
        return int(text)
    if dtype is Datatype.DECIMAL:
        try:
            return decimal.Decimal(text)
        except decimal.InvalidOperation as exc:
            raise ValueError(f"invalid decimal literal {text!r}") from exc
    if dtype is Datatype.DATE:
        return datetime.date.fromisoformat(text)
    if dtype is Datatype.BOOLEAN:
        if text in ("true", "1"):
            return True
        if text in ("false", "0"):
            return False
        raise ValueError(f"invalid boolean literal {text!r}")
    raise ValueError(f"unknown datatype {dtype!r}")


def scalar_to_text(value: Scalar) -> str:
    """Inverse of :func:`coerce_scalar`; null becomes the empty string."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, datetime.date):
        return value.isoformat()
    return str(value)


def _freeze(obj) -> None:
    # Normalize every sequence-typed field to a tuple so instances are
    # deeply immutable and comparable.
    for f in fields(obj):
        value = getattr(obj, f.name)
        if isinstance(value, list):
            object.__setattr__(obj, f.name, tuple(value))


@dataclass(frozen=True)
class Property:
    name: str
    type: Datatype


@dataclass(frozen=True)
class Level:
    """A granularity within a hierarchy; members are identified by `key`."""

    name: str
    properties: tuple[Property, ...]
    key: tuple[str, ...]

    def __post_init__(self):
        _freeze(self)

    def property_map(self) -> dict[str, Property]:
        return {p.name: p for p in self.properties}


@dataclass(frozen=True)
class Cardinality:
    """Participation bounds, written ``(min,max)`` with max 1 or n."""

    min: int  # 0 or 1
    max: int | None  # 1, or None for "n"

    def __str__(self) -> str:
        return f"({self.min},{'n' if self.max is None else self.max})"

    @classmethod
    def parse(cls, text: str) -> "Cardinality":
        body = text.strip()
        if not (body.startswith("(") and body.endswith(")")):
            raise ValueError(f"malformed cardinality {text!r}")
        lo, _, hi = body[1:-1].partition(",")
        if lo.strip() not in ("0", "1"):
            raise ValueError(f"cardinality min must be 0 or 1: {text!r}")
        hi = hi.strip()
        if hi not in ("1", "n"):
            raise ValueError(f"cardinality max must be 1 or n: {text!r}")
        return cls(min=int(lo), max=None if hi == "n" else 1)


@dataclass(frozen=True)
class ParentChildRel:
    """Child-to-parent roll-up relation between two levels.

    `child_card` bounds how many children a parent member has;
    `parent_card` bounds how many parents a child member has.
    Relations sharing an `exclusive_group` are instance-level
    alternatives: each child member follows at most one of them.
    """

    child_level: str
    parent_level: str
    child_card: Cardinality
    parent_card: Cardinality
    exclusive_group: str | None = None


@dataclass(frozen=True)
class Hierarchy:
    name: str
    relationships: tuple[ParentChildRel, ...]

    def __post_init__(self):
        _freeze(self)


@dataclass(frozen=True)
class Dimension:
    """An analysis perspective rooted at `bottom_level`.

    An empty `hierarchies` list denotes the single implicit hierarchy:
    every declared parent-child relation reachable from the bottom
    level.
    """

    name: str
    bottom_level: str
    hierarchies: tuple[str, ...] = ()

    def __post_init__(self):
        _freeze(self)


@dataclass(frozen=True)
class Role:
    name: str
    dimension: str


@dataclass(frozen=True)
class FactRelationship:
    """Relates members across dimensions and carries the measures."""

    name: str
    roles: tuple[Role, ...]
    measures: tuple[Property, ...] = ()
    properties: tuple[Property, ...] = ()

    def __post_init__(self):
        _freeze(self)

    def measure_map(self) -> dict[str, Property]:
        return {m.name: m for m in self.measures}


@dataclass(frozen=True)
class CdlModel:
    name: str
    levels: tuple[Level, ...] = ()
    dimensions: tuple[Dimension, ...] = ()
    hierarchies: tuple[Hierarchy, ...] = ()
    fact_relationships: tuple[FactRelationship, ...] = ()

    def __post_init__(self):
        _freeze(self)

    def level(self, name: str) -> Level | None:
        return next((l for l in self.levels if l.name == name), None)

    def dimension(self, name: str) -> Dimension | None:
        return next((d for d in self.dimensions if d.name == name), None)

    def hierarchy(self, name: str) -> Hierarchy | None:
        return next((h for h in self.hierarchies if h.name == name), None)

    def fact_relationship(self, name: str) -> FactRelationship | None:
        return next((f for f in self.fact_relationships if f.name == name), None)

    def all_relationships(self) -> tuple[ParentChildRel, ...]:
        return tuple(r for h in self.hierarchies for r in h.relationships)

    def dimension_relationships(self, dimension: Dimension) -> tuple[ParentChildRel, ...]:
        """Relations making up the dimension's hierarchy graph.

        Named hierarchies contribute their declared relations; with no
        named hierarchy, the implicit hierarchy is every relation
        reachable child-to-parent from the bottom level.
        """
        if dimension.hierarchies:
            seen: list[ParentChildRel] = []
            for hname in dimension.hierarchies:
                h = self.hierarchy(hname)
                if h is None:
                    continue
                for rel in h.relationships:
                    if rel not in seen:
                        seen.append(rel)
            return tuple(seen)
        by_child: dict[str, list[ParentChildRel]] = {}
        for rel in self.all_relationships():
            by_child.setdefault(rel.child_level, []).append(rel)
        reached: list[ParentChildRel] = []
        frontier = [dimension.bottom_level]
        visited = set()
        while frontier:
            level = frontier.pop()
            if level in visited:
                continue
            visited.add(level)
            for rel in by_child.get(level, ()):
                if rel not in reached:
                    reached.append(rel)
                frontier.append(rel.parent_level)
        return tuple(reached)


@dataclass(frozen=True)
class Column:
    name: str
    type: Datatype


@dataclass(frozen=True)
class ForeignKey:
    columns: tuple[str, ...]
    target_table: str
    target_columns: tuple[str, ...]

    def __post_init__(self):
        _freeze(self)

    def __str__(self) -> str:
        return f"({','.join(self.columns)}) -> {self.target_table}({','.join(self.target_columns)})"


@dataclass(frozen=True)
class Table:
    name: str
    columns: tuple[Column, ...]
    primary_key: tuple[str, ...]
    foreign_keys: tuple[ForeignKey, ...] = ()

    def __post_init__(self):
        _freeze(self)

    def column_map(self) -> dict[str, Column]:
        return {c.name: c for c in self.columns}


@dataclass(frozen=True)
class SdlModel:
    name: str
    fact_tables: tuple[Table, ...] = ()
    dimension_tables: tuple[Table, ...] = ()

    def __post_init__(self):
        _freeze(self)

    @property
    def tables(self) -> tuple[Table, ...]:
        return self.fact_tables + self.dimension_tables

    def table(self, name: str) -> Table | None:
        return next((t for t in self.tables if t.name == name), None)


class FragmentKind(str, enum.Enum):
    LEVEL = "level-mapping"
    FACT_RELATIONSHIP = "factrel-mapping"


class ConditionOperator(str, enum.Enum):
    EQUALS = "equals"
    IN = "in"


@dataclass(frozen=True)
class Condition:
    """Restricts a fragment to rows whose column takes one of `values`.

    Values are kept in lexical (string) form; they are coerced against
    the column's datatype where the condition is checked or compiled.
    """

    column: str
    operator: ConditionOperator
    values: tuple[str, ...]

    def __post_init__(self):
        _freeze(self)

    def label(self) -> str:
        if self.operator is ConditionOperator.EQUALS and len(self.values) == 1:
            return f"{self.column} = {self.values[0]}"
        return f"{self.column} ∈ {{{','.join(self.values)}}}"


@dataclass(frozen=True)
class PropertyMapping:
    property: str
    column: str


@dataclass(frozen=True)
class MappingFragment:
    """All attribute associations between one CDL entity and one SDL table.

    Not every property of the entity needs to appear; unmapped
    properties surface as null columns in the compiled views.
    """

    kind: FragmentKind
    cdl_entity: str
    sdl_table: str
    property_mappings: tuple[PropertyMapping, ...]
    conditions: tuple[Condition, ...] = ()
    name: str | None = None

    def __post_init__(self):
        _freeze(self)

    def mapped_properties(self) -> tuple[str, ...]:
        return tuple(pm.property for pm in self.property_mappings)

    def column_for(self, prop: str) -> str | None:
        return next((pm.column for pm in self.property_mappings if pm.property == prop), None)


@dataclass(frozen=True)
class MdlModel:
    fragments: tuple[MappingFragment, ...] = ()

    def __post_init__(self):
        _freeze(self)

    def fragments_for(self, kind: FragmentKind, entity: str) -> tuple[MappingFragment, ...]:
        return tuple(f for f in self.fragments if f.kind is kind and f.cdl_entity == entity)


class Severity(str, enum.Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    """One validation or compilation finding, anchored to a model path."""

    code: str
    severity: Severity
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity.value}: [{self.code}] {self.path}: {self.message}"


def errors_in(diagnostics) -> list[Diagnostic]:
    return [d for d in diagnostics if d.severity is Severity.ERROR]
