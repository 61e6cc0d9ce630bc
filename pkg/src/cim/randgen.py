"""Randomized small instances and queries for differential testing.

Every generated instance is validation-clean, compiles without
diagnostics, and ships referentially consistent data whose exclusive
splits are real partitions, so the whole check suite passes on it.
Generation is deterministic per seed.
"""

from __future__ import annotations

import decimal
import random
from dataclasses import dataclass

from .fixtures import table_csv
from .model import (
    Cardinality,
    CdlModel,
    Column,
    Condition,
    ConditionOperator,
    Datatype,
    Dimension,
    FactRelationship,
    ForeignKey,
    FragmentKind,
    Hierarchy,
    Level,
    MappingFragment,
    MdlModel,
    ParentChildRel,
    Property,
    PropertyMapping,
    Role,
    SdlModel,
    Table,
)
from .query import CqlQuery, QueryCondition, reachable_levels
from .storage import AggregateFunction, ComparisonOp, Store


@dataclass
class RandomInstance:
    seed: int
    cdl: CdlModel
    sdl: SdlModel
    mdl: MdlModel
    tables: dict[str, list[tuple]]

    def csv(self, table_name: str) -> bytes:
        table = self.sdl.table(table_name)
        return table_csv(table, self.tables[table_name])

    def store(self) -> Store:
        store = Store()
        for table in self.sdl.tables:
            store.load_table(table, self.csv(table.name))
        store.freeze()
        return store


_CARD_11 = Cardinality(1, 1)
_CARD_01 = Cardinality(0, 1)
_CARD_0N = Cardinality(0, None)


class _DimBuilder:
    """One dimension's levels, tables, fragments, data, and relations."""

    def __init__(self, index: int, rng: random.Random):
        self.rng = rng
        self.index = index
        self.name = f"D{index}"
        self.levels: list[Level] = []
        self.rels: list[ParentChildRel] = []
        self.tables: list[Table] = []
        self.fragments: list[MappingFragment] = []
        self.rows: dict[str, list[tuple]] = {}
        self.bottom: str = ""
        self.bottom_table: str = ""
        self.hierarchy_listed = rng.random() < 0.5

    def _level(self, name: str, with_name_prop: bool, with_unmapped: bool) -> Level:
        props = [Property(f"{name}Key", Datatype.INTEGER)]
        if with_name_prop:
            props.append(Property("Name", Datatype.STRING))
        if with_unmapped:
            props.append(Property("Notes", Datatype.STRING))
        return Level(name, tuple(props), (f"{name}Key",))

    def build(self) -> None:
        if self.rng.random() < 0.4:
            self._build_split()
        else:
            self._build_linear()

    def _table_rows(self, table: str, count: int, fk_values=None, kinds=False):
        rows = []
        for i in range(1, count + 1):
            row = [i, f"{table}-{i:02d}"]
            if kinds:
                row.append(self.rng.choice(("a", "b")))
            if fk_values is not None:
                row.append(self.rng.choice(fk_values))
            rows.append(tuple(row))
        self.rows[table] = rows
        return rows

    def _make_table(self, name: str, fk_to: str | None, kinds: bool = False) -> Table:
        columns = [Column("Id", Datatype.INTEGER), Column("Tag", Datatype.STRING)]
        if kinds:
            columns.append(Column("Kind", Datatype.STRING))
        fks = ()
        if fk_to is not None:
            columns.append(Column("Up", Datatype.INTEGER))
            fks = (ForeignKey(("Up",), fk_to, ("Id",)),)
        return Table(name, tuple(columns), ("Id",), fks)

    def _map_level(self, level: Level, table: str, conditions=(), key_column: str = "Id"):
        mappings = [PropertyMapping(f"{level.name}Key", key_column)]
        if "Name" in level.property_map():
            mappings.append(PropertyMapping("Name", "Tag"))
        self.fragments.append(
            MappingFragment(
                FragmentKind.LEVEL,
                level.name,
                table,
                tuple(mappings),
                tuple(conditions),
                name=f"S-{level.name}",
            )
        )

    def _build_linear(self) -> None:
        depth = self.rng.randint(1, 4)
        names = [f"{self.name}L{j}" for j in range(depth)]
        tables = [f"T{self.index}{j}" for j in range(depth)]
        # Tables chain upward: T0 -> T1 -> ... via Up FKs.
        counts = []
        for j in reversed(range(depth)):
            upper = counts[-1] if counts else None
            counts.append(self.rng.randint(2, 4) if j > 0 else self.rng.randint(4, 12))
        counts.reverse()  # counts[j] rows for table j

        for j, (lname, tname) in enumerate(zip(names, tables)):
            has_fk = j < depth - 1
            table = self._make_table(tname, tables[j + 1] if has_fk else None)
            self.tables.append(table)
            level = self._level(lname, self.rng.random() < 0.6, self.rng.random() < 0.3)
            self.levels.append(level)
            if j < depth - 1:
                self.rels.append(ParentChildRel(lname, names[j + 1], _CARD_0N, _CARD_11))

        for j in reversed(range(depth)):
            fk_values = None
            if j < depth - 1:
                fk_values = [row[0] for row in self.rows[tables[j + 1]]]
            self._table_rows(tables[j], counts[j], fk_values=fk_values)

        two_table_top = depth >= 2 and self.rng.random() < 0.35
        for j, (lname, tname) in enumerate(zip(names, tables)):
            if two_table_top and j == depth - 1:
                # The top level spans two tables: its key lives on the
                # table below (the FK column), its label on its own.
                top = self.levels[-1]
                label_level = Level(
                    lname,
                    tuple(list(top.properties) + [Property("Label", Datatype.STRING)]),
                    top.key,
                )
                self.levels[-1] = label_level
                self.fragments.append(
                    MappingFragment(
                        FragmentKind.LEVEL,
                        lname,
                        tables[j - 1],
                        (PropertyMapping(f"{lname}Key", "Up"),),
                        name=f"S-{lname}-key",
                    )
                )
                extra = [PropertyMapping("Label", "Tag")]
                if "Name" in label_level.property_map():
                    extra.append(PropertyMapping("Name", "Tag"))
                self.fragments.append(
                    MappingFragment(
                        FragmentKind.LEVEL,
                        lname,
                        tname,
                        tuple(extra),
                        name=f"S-{lname}-label",
                    )
                )
            else:
                self._map_level(self.levels[j], tname)
        self.bottom = names[0]
        self.bottom_table = tables[0]

    def _build_split(self) -> None:
        b, a1, a2, c = (f"{self.name}{suffix}" for suffix in ("Base", "SideA", "SideB", "Top"))
        t0, t1 = f"T{self.index}0", f"T{self.index}1"
        self.tables.append(self._make_table(t0, t1, kinds=True))
        self.tables.append(self._make_table(t1, None))

        top_rows = self._table_rows(t1, self.rng.randint(2, 4))
        self._table_rows(t0, self.rng.randint(5, 12), fk_values=[r[0] for r in top_rows], kinds=True)

        group = f"X{self.index}"
        self.levels.append(self._level(b, True, False))
        self.levels.append(self._level(a1, False, self.rng.random() < 0.5))
        self.levels.append(self._level(a2, False, False))
        self.levels.append(self._level(c, True, False))
        self.rels += [
            ParentChildRel(b, a1, _CARD_11, _CARD_01, exclusive_group=group),
            ParentChildRel(b, a2, _CARD_11, _CARD_01, exclusive_group=group),
            ParentChildRel(a1, c, _CARD_0N, _CARD_11),
            ParentChildRel(a2, c, _CARD_0N, _CARD_11),
        ]
        self._map_level(self.levels[0], t0)
        self._map_level(self.levels[1], t0, (Condition("Kind", ConditionOperator.EQUALS, ("a",)),))
        self._map_level(self.levels[2], t0, (Condition("Kind", ConditionOperator.IN, ("b",)),))
        self._map_level(self.levels[3], t1)
        self.bottom = b
        self.bottom_table = t0


def generate_random_instance(seed: int) -> RandomInstance:
    """A small consistent (CDL, SDL, MDL, data) quadruple; same seed, same instance."""
    rng = random.Random(seed)
    dims = [_DimBuilder(i + 1, rng) for i in range(rng.randint(2, 3))]
    for dim in dims:
        dim.build()

    levels = tuple(l for dim in dims for l in dim.levels)
    hierarchies = tuple(
        Hierarchy(f"H{dim.index}", tuple(dim.rels)) for dim in dims if dim.rels
    )
    dimensions = tuple(
        Dimension(
            dim.name,
            dim.bottom,
            (f"H{dim.index}",) if dim.rels and dim.hierarchy_listed else (),
        )
        for dim in dims
    )

    measures = [Property("Amount", Datatype.DECIMAL)]
    if rng.random() < 0.5:
        measures.append(Property("Units", Datatype.INTEGER))
    fact = FactRelationship(
        "Facts",
        roles=tuple(Role(f"r{dim.index}", dim.name) for dim in dims),
        measures=tuple(measures),
    )
    cdl = CdlModel("random", levels, dimensions, hierarchies, (fact,))

    fact_columns = [Column("RowID", Datatype.INTEGER)]
    fact_fks = []
    for dim in dims:
        fact_columns.append(Column(f"{dim.bottom}Ref", Datatype.INTEGER))
        fact_fks.append(ForeignKey((f"{dim.bottom}Ref",), dim.bottom_table, ("Id",)))
    for measure in measures:
        fact_columns.append(Column(measure.name, measure.type))
    fact_table = Table("FactTable", tuple(fact_columns), ("RowID",), tuple(fact_fks))
    sdl = SdlModel(
        "randomDW",
        fact_tables=(fact_table,),
        dimension_tables=tuple(t for dim in dims for t in dim.tables),
    )

    fragments = [f for dim in dims for f in dim.fragments]
    fragments.append(
        MappingFragment(
            FragmentKind.FACT_RELATIONSHIP,
            "Facts",
            "FactTable",
            tuple(PropertyMapping(m.name, m.name) for m in measures),
            name="S-Facts",
        )
    )
    mdl = MdlModel(tuple(fragments))

    tables = {}
    for dim in dims:
        tables.update(dim.rows)
    fact_rows = []
    for i in range(1, rng.randint(20, 60) + 1):
        row = [i]
        for dim in dims:
            row.append(rng.choice(tables[dim.bottom_table])[0])
        row.append(None if rng.random() < 0.08 else decimal.Decimal(rng.randrange(100, 9999)) / 100)
        if len(measures) > 1:
            row.append(rng.randint(0, 50))
        fact_rows.append(tuple(row))
    tables["FactTable"] = fact_rows

    return RandomInstance(seed=seed, cdl=cdl, sdl=sdl, mdl=mdl, tables=tables)


def _column_values(instance: RandomInstance, level_name: str, prop: str):
    fragment = next(
        f
        for f in instance.mdl.fragments
        if f.kind is FragmentKind.LEVEL and f.cdl_entity == level_name and f.column_for(prop)
    )
    table = instance.sdl.table(fragment.sdl_table)
    index = [c.name for c in table.columns].index(fragment.column_for(prop))
    return sorted({row[index] for row in instance.tables[table.name] if row[index] is not None}, key=str)


def random_query(instance: RandomInstance, rng: random.Random) -> CqlQuery:
    """A valid query over the instance: random roll-ups, conditions, function."""
    cdl = instance.cdl
    fact = cdl.fact_relationships[0]
    rollups = []
    mentioned = []
    for role in fact.roles:
        if rng.random() < 0.55:
            dimension = cdl.dimension(role.dimension)
            target = rng.choice(reachable_levels(cdl, dimension))
            rollups.append((role.dimension, target))
            mentioned.append(target)
    candidate_levels = mentioned + [
        cdl.dimension(role.dimension).bottom_level for role in fact.roles
    ]
    conditions = []
    for _ in range(rng.randint(0, 2)):
        level_name = rng.choice(candidate_levels)
        level = cdl.level(level_name)
        mapped = [
            p
            for p in level.properties
            if any(
                f.kind is FragmentKind.LEVEL and f.cdl_entity == level_name and f.column_for(p.name)
                for f in instance.mdl.fragments
            )
        ]
        prop = rng.choice(mapped)
        values = _column_values(instance, level_name, prop.name)
        if not values:
            continue
        if prop.type is Datatype.INTEGER and rng.random() < 0.4:
            op = rng.choice((ComparisonOp.LESS_THAN, ComparisonOp.GREATER_THAN))
            picked = (rng.choice(values),)
        elif rng.random() < 0.5:
            op = ComparisonOp.IN
            picked = tuple(rng.sample(values, k=min(len(values), rng.randint(1, 3))))
        else:
            op = ComparisonOp.EQUALS
            picked = (rng.choice(values),)
        conditions.append(QueryCondition(level=level_name, property=prop.name, operator=op, values=picked))

    function = rng.choice(list(AggregateFunction))
    if function is AggregateFunction.COUNT:
        measure = None
    else:
        measure = rng.choice([m.name for m in fact.measures])
    return CqlQuery(
        fact_relationship=fact.name,
        rollups=tuple(rollups),
        conditions=tuple(conditions),
        function=function,
        measure=measure,
    )
