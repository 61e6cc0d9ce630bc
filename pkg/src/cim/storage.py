"""The embedded warehouse store and its relational algebra.

Relations use bag semantics with SQL-style null handling: conditions
never match null, sum/avg/min/max skip nulls, count counts rows.  The
store is in-memory only; tables are loaded from CSV, then the store is
frozen and serves arbitrary concurrent read-only evaluation.
"""

from __future__ import annotations

import csv
import decimal
import enum
import io
from dataclasses import dataclass

from .model import Datatype, Scalar, SdlModel, Table, coerce_scalar


class StorageError(Exception):
    pass


class LoadError(StorageError):
    """CSV ingestion failure; carries the offending line when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


class PlanError(StorageError):
    """The plan references columns or tables its inputs do not provide."""


@dataclass(frozen=True)
class Violation:
    """An instance-level check failure with a structured witness."""

    code: str
    subject: str
    message: str
    details: dict

    def to_dict(self) -> dict:
        return {
            "code": self.code,
            "subject": self.subject,
            "message": self.message,
            "details": self.details,
        }


@dataclass
class Relation:
    """An ordered schema plus a bag of rows (tuples, nulls permitted)."""

    schema: tuple[tuple[str, Datatype], ...]
    rows: list[tuple]

    @property
    def columns(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.schema)

    def index_of(self, column: str) -> int:
        for i, (name, _) in enumerate(self.schema):
            if name == column:
                return i
        raise PlanError(f"no column {column!r} in ({', '.join(self.columns)})")

    def sorted_rows(self) -> list[tuple]:
        return sorted(self.rows, key=_row_sort_key)


def _row_sort_key(row: tuple):
    return tuple((value is None, str(type(value)), value) for value in row)


class ComparisonOp(str, enum.Enum):
    EQUALS = "equals"
    IN = "in"
    LESS_THAN = "less-than"
    GREATER_THAN = "greater-than"


@dataclass(frozen=True)
class Comparison:
    column: str
    op: ComparisonOp
    values: tuple[Scalar, ...]

    def matches(self, value: Scalar) -> bool:
        if value is None:
            return False
        if self.op in (ComparisonOp.EQUALS, ComparisonOp.IN):
            return value in self.values
        if self.op is ComparisonOp.LESS_THAN:
            return value < self.values[0]
        return value > self.values[0]

    def to_dict(self) -> dict:
        return {"column": self.column, "operator": self.op.value, "values": [_scalar_json(v) for v in self.values]}


@dataclass(frozen=True)
class And:
    parts: tuple["Predicate", ...]

    def to_dict(self) -> dict:
        return {"and": [p.to_dict() for p in self.parts]}


Predicate = Comparison | And


def _predicate_columns(pred: Predicate):
    if isinstance(pred, Comparison):
        yield pred.column
    else:
        for part in pred.parts:
            yield from _predicate_columns(part)


def _predicate_matches(pred: Predicate, row: tuple, indexes: dict[str, int]) -> bool:
    if isinstance(pred, Comparison):
        return pred.matches(row[indexes[pred.column]])
    return all(_predicate_matches(part, row, indexes) for part in pred.parts)


class AggregateFunction(str, enum.Enum):
    SUM = "sum"
    COUNT = "count"
    AVG = "avg"
    MIN = "min"
    MAX = "max"


# ---------------------------------------------------------------------------
# Plan operators


@dataclass(frozen=True)
class Scan:
    table: str


@dataclass(frozen=True)
class Select:
    child: "Plan"
    predicate: Predicate


@dataclass(frozen=True)
class ProjectItem:
    """One output column: a source column, or a typed null filler."""

    name: str
    source: str | None = None
    null_type: Datatype | None = None


@dataclass(frozen=True)
class Project:
    child: "Plan"
    items: tuple[ProjectItem, ...]


@dataclass(frozen=True)
class Rename:
    child: "Plan"
    mapping: tuple[tuple[str, str], ...]  # (old, new) pairs


@dataclass(frozen=True)
class Join:
    left: "Plan"
    right: "Plan"
    on: tuple[tuple[str, str], ...]  # (left column, right column) pairs


@dataclass(frozen=True)
class Union:
    inputs: tuple["Plan", ...]


@dataclass(frozen=True)
class Aggregation:
    function: AggregateFunction
    measure: str | None  # None only for count
    output: str


@dataclass(frozen=True)
class Aggregate:
    child: "Plan"
    group_by: tuple[str, ...]
    aggregations: tuple[Aggregation, ...]


Plan = Scan | Select | Project | Rename | Join | Union | Aggregate


def output_schema(plan: Plan, store: "Store") -> tuple[tuple[str, Datatype], ...]:
    """Type-check the plan bottom-up; raises PlanError on any mismatch."""
    if isinstance(plan, Scan):
        return store.relation(plan.table).schema
    if isinstance(plan, Select):
        schema = output_schema(plan.child, store)
        names = {name for name, _ in schema}
        for column in _predicate_columns(plan.predicate):
            if column not in names:
                raise PlanError(f"select references unknown column {column!r}")
        return schema
    if isinstance(plan, Project):
        schema = output_schema(plan.child, store)
        types = dict(schema)
        out = []
        for item in plan.items:
            if item.source is not None:
                if item.source not in types:
                    raise PlanError(f"project references unknown column {item.source!r}")
                out.append((item.name, types[item.source]))
            else:
                if item.null_type is None:
                    raise PlanError(f"null projection {item.name!r} needs a datatype")
                out.append((item.name, item.null_type))
        _check_distinct([name for name, _ in out], "project output")
        return tuple(out)
    if isinstance(plan, Rename):
        schema = output_schema(plan.child, store)
        mapping = dict(plan.mapping)
        names = {name for name, _ in schema}
        for old in mapping:
            if old not in names:
                raise PlanError(f"rename references unknown column {old!r}")
        renamed = [(mapping.get(name, name), dtype) for name, dtype in schema]
        _check_distinct([name for name, _ in renamed], "rename output")
        return tuple(renamed)
    if isinstance(plan, Join):
        left = output_schema(plan.left, store)
        right = output_schema(plan.right, store)
        left_names = {name for name, _ in left}
        right_names = {name for name, _ in right}
        for lcol, rcol in plan.on:
            if lcol not in left_names:
                raise PlanError(f"join references unknown left column {lcol!r}")
            if rcol not in right_names:
                raise PlanError(f"join references unknown right column {rcol!r}")
        combined = list(left) + list(right)
        _check_distinct([name for name, _ in combined], "join output")
        return tuple(combined)
    if isinstance(plan, Union):
        if not plan.inputs:
            raise PlanError("union needs at least one input")
        schemas = [output_schema(child, store) for child in plan.inputs]
        for other in schemas[1:]:
            if other != schemas[0]:
                raise PlanError("union inputs must share one schema")
        return schemas[0]
    if isinstance(plan, Aggregate):
        schema = output_schema(plan.child, store)
        types = dict(schema)
        out = []
        for column in plan.group_by:
            if column not in types:
                raise PlanError(f"group-by references unknown column {column!r}")
            out.append((column, types[column]))
        for agg in plan.aggregations:
            out.append((agg.output, _aggregate_type(agg, types)))
        _check_distinct([name for name, _ in out], "aggregate output")
        return tuple(out)
    raise PlanError(f"unknown plan node {type(plan).__name__}")


def _check_distinct(names: list[str], what: str) -> None:
    if len(names) != len(set(names)):
        dupes = sorted({n for n in names if names.count(n) > 1})
        raise PlanError(f"{what} has duplicate columns: {', '.join(dupes)}")


def _aggregate_type(agg: Aggregation, types: dict[str, Datatype]) -> Datatype:
    if agg.function is AggregateFunction.COUNT:
        return Datatype.INTEGER
    if agg.measure is None:
        raise PlanError(f"{agg.function.value} needs a measure column")
    if agg.measure not in types:
        raise PlanError(f"aggregate references unknown column {agg.measure!r}")
    measure_type = types[agg.measure]
    if agg.function in (AggregateFunction.SUM, AggregateFunction.AVG):
        if measure_type not in (Datatype.INTEGER, Datatype.DECIMAL):
            raise PlanError(f"{agg.function.value} needs a numeric measure, got {measure_type.value}")
    if agg.function is AggregateFunction.AVG:
        return Datatype.DECIMAL
    return measure_type


def evaluate(plan: Plan, store: "Store") -> Relation:
    """Bag-semantics evaluation of a type-checked plan."""
    schema = output_schema(plan, store)
    return Relation(schema=schema, rows=_rows(plan, store))


def _rows(plan: Plan, store: "Store") -> list[tuple]:
    if isinstance(plan, Scan):
        return list(store.relation(plan.table).rows)
    if isinstance(plan, Select):
        child = evaluate(plan.child, store)
        indexes = {name: i for i, (name, _) in enumerate(child.schema)}
        return [row for row in child.rows if _predicate_matches(plan.predicate, row, indexes)]
    if isinstance(plan, Project):
        child = evaluate(plan.child, store)
        indexes = {name: i for i, (name, _) in enumerate(child.schema)}
        pickers = [(indexes[item.source] if item.source is not None else None) for item in plan.items]
        return [tuple(row[i] if i is not None else None for i in pickers) for row in child.rows]
    if isinstance(plan, Rename):
        return list(evaluate(plan.child, store).rows)
    if isinstance(plan, Join):
        left = evaluate(plan.left, store)
        right = evaluate(plan.right, store)
        left_idx = [left.index_of(lcol) for lcol, _ in plan.on]
        right_idx = [right.index_of(rcol) for _, rcol in plan.on]
        index: dict[tuple, list[tuple]] = {}
        for row in right.rows:
            key = tuple(row[i] for i in right_idx)
            if any(v is None for v in key):
                continue  # null never joins
            index.setdefault(key, []).append(row)
        out = []
        for row in left.rows:
            key = tuple(row[i] for i in left_idx)
            if any(v is None for v in key):
                continue
            for match in index.get(key, ()):
                out.append(row + match)
        return out
    if isinstance(plan, Union):
        out = []
        for child in plan.inputs:
            out.extend(evaluate(child, store).rows)
        return out
    if isinstance(plan, Aggregate):
        child = evaluate(plan.child, store)
        key_idx = [child.index_of(c) for c in plan.group_by]
        measure_idx = {
            agg.measure: child.index_of(agg.measure) for agg in plan.aggregations if agg.measure is not None
        }
        groups: dict[tuple, list[tuple]] = {}
        for row in child.rows:
            groups.setdefault(tuple(row[i] for i in key_idx), []).append(row)
        if not groups and not plan.group_by:
            groups[()] = []  # scalar aggregation always yields one row
        out = []
        for key in groups:
            members = groups[key]
            values = []
            for agg in plan.aggregations:
                if agg.function is AggregateFunction.COUNT:
                    values.append(len(members))
                    continue
                observed = [row[measure_idx[agg.measure]] for row in members]
                observed = [v for v in observed if v is not None]
                values.append(_fold(agg.function, observed))
            out.append(key + tuple(values))
        return out
    raise PlanError(f"unknown plan node {type(plan).__name__}")


def _fold(function: AggregateFunction, observed: list) -> Scalar:
    if not observed:
        return None  # empty-sum convention: aggregates of nothing are null
    if function is AggregateFunction.SUM:
        return sum(observed)
    if function is AggregateFunction.AVG:
        return decimal.Decimal(sum(observed)) / decimal.Decimal(len(observed))
    if function is AggregateFunction.MIN:
        return min(observed)
    return max(observed)


# ---------------------------------------------------------------------------
# Plan serialization (inspection documents; one-way)


def _scalar_json(value: Scalar):
    if isinstance(value, decimal.Decimal):
        return str(value)
    if hasattr(value, "isoformat"):
        return value.isoformat()
    return value


def plan_to_dict(plan: Plan) -> dict:
    if isinstance(plan, Scan):
        return {"op": "scan", "table": plan.table}
    if isinstance(plan, Select):
        return {"op": "select", "predicate": plan.predicate.to_dict(), "input": plan_to_dict(plan.child)}
    if isinstance(plan, Project):
        items = []
        for item in plan.items:
            if item.source is not None:
                items.append({"name": item.name, "source": item.source})
            else:
                items.append({"name": item.name, "null": item.null_type.value})
        return {"op": "project", "columns": items, "input": plan_to_dict(plan.child)}
    if isinstance(plan, Rename):
        return {"op": "rename", "mapping": {old: new for old, new in plan.mapping}, "input": plan_to_dict(plan.child)}
    if isinstance(plan, Join):
        return {
            "op": "join",
            "on": [[l, r] for l, r in plan.on],
            "left": plan_to_dict(plan.left),
            "right": plan_to_dict(plan.right),
        }
    if isinstance(plan, Union):
        return {"op": "union", "inputs": [plan_to_dict(child) for child in plan.inputs]}
    if isinstance(plan, Aggregate):
        return {
            "op": "aggregate",
            "groupBy": list(plan.group_by),
            "aggregations": [
                {"function": a.function.value, "measure": a.measure, "output": a.output} for a in plan.aggregations
            ],
            "input": plan_to_dict(plan.child),
        }
    raise PlanError(f"unknown plan node {type(plan).__name__}")


# ---------------------------------------------------------------------------
# Store


class Store:
    """Holds the loaded SDL-shaped tables; freeze before evaluating queries."""

    def __init__(self):
        self._tables: dict[str, Table] = {}
        self._relations: dict[str, Relation] = {}
        self._frozen = False

    @property
    def frozen(self) -> bool:
        return self._frozen

    def freeze(self) -> None:
        self._frozen = True

    @property
    def tables(self) -> tuple[Table, ...]:
        return tuple(self._tables.values())

    def table(self, name: str) -> Table:
        if name not in self._tables:
            raise StorageError(f"table {name!r} is not loaded")
        return self._tables[name]

    def relation(self, name: str) -> Relation:
        if name not in self._relations:
            raise PlanError(f"table {name!r} is not loaded")
        return self._relations[name]

    def load_table(self, table: Table, csv_data: bytes | str) -> int:
        """Ingest one CSV document (header row mandatory) into `table`."""
        if self._frozen:
            raise StorageError("store is frozen; loading is no longer allowed")
        if table.name in self._tables:
            raise StorageError(f"table {table.name!r} is already loaded")
        if isinstance(csv_data, bytes):
            csv_data = csv_data.decode("utf-8")
        reader = csv.reader(io.StringIO(csv_data, newline=""))
        try:
            header = next(reader)
        except StopIteration:
            raise LoadError(f"table {table.name!r}: CSV is missing its header row") from None
        declared = [c.name for c in table.columns]
        if sorted(header) != sorted(declared):
            raise LoadError(
                f"table {table.name!r}: CSV header ({', '.join(header)}) does not match "
                f"declared columns ({', '.join(declared)})",
                line=1,
            )
        order = [header.index(name) for name in declared]
        types = [c.type for c in table.columns]
        pk_positions = [declared.index(name) for name in table.primary_key]

        rows: list[tuple] = []
        seen_keys: set[tuple] = set()
        for record in reader:
            line = reader.line_num
            if not record:
                continue
            if len(record) != len(header):
                raise LoadError(
                    f"table {table.name!r}: expected {len(header)} fields, got {len(record)}", line=line
                )
            values = []
            for decl_index, (position, dtype) in enumerate(zip(order, types)):
                text = record[position]
                try:
                    values.append(coerce_scalar(dtype, text))
                except ValueError as exc:
                    raise LoadError(f"table {table.name!r}, column {declared[decl_index]!r}: {exc}", line=line) from exc
            row = tuple(values)
            key = tuple(row[i] for i in pk_positions)
            if any(v is None for v in key):
                raise LoadError(f"table {table.name!r}: null in primary key {key!r}", line=line)
            if key in seen_keys:
                raise LoadError(f"table {table.name!r}: duplicate primary key {key!r}", line=line)
            seen_keys.add(key)
            rows.append(row)

        self._tables[table.name] = table
        self._relations[table.name] = Relation(
            schema=tuple((c.name, c.type) for c in table.columns), rows=rows
        )
        return len(rows)

    def check_foreign_keys(self) -> list[Violation]:
        """One violation per distinct dangling foreign-key value."""
        out: list[Violation] = []
        for table in self._tables.values():
            relation = self._relations[table.name]
            for fk in table.foreign_keys:
                if fk.target_table not in self._relations:
                    out.append(
                        Violation(
                            code="missing-fk-target",
                            subject=table.name,
                            message=f"foreign key {fk} targets unloaded table {fk.target_table!r}",
                            details={"foreignKey": str(fk)},
                        )
                    )
                    continue
                target = self._relations[fk.target_table]
                target_idx = [target.index_of(c) for c in fk.target_columns]
                known = {tuple(row[i] for i in target_idx) for row in target.rows}
                local_idx = [relation.index_of(c) for c in fk.columns]
                reported: set[tuple] = set()
                for row in relation.rows:
                    value = tuple(row[i] for i in local_idx)
                    if any(v is None for v in value) or value in known or value in reported:
                        continue
                    reported.add(value)
                    out.append(
                        Violation(
                            code="dangling-foreign-key",
                            subject=table.name,
                            message=f"{table.name}.{fk} has no target row for {value!r}",
                            details={"foreignKey": str(fk), "value": [_scalar_json(v) for v in value]},
                        )
                    )
        return out

    def derive_sdl(self, name: str = "store") -> SdlModel:
        """Rebuild an SdlModel from the loaded tables.

        A table counts as a fact table iff no other table references it
        and it has at least two outgoing foreign keys; everything else
        is a dimension table.
        """
        referenced = {fk.target_table for t in self._tables.values() for fk in t.foreign_keys}
        facts, dims = [], []
        for table in sorted(self._tables.values(), key=lambda t: t.name):
            if table.name not in referenced and len(table.foreign_keys) >= 2:
                facts.append(table)
            else:
                dims.append(table)
        return SdlModel(name=name, fact_tables=tuple(facts), dimension_tables=tuple(dims))
