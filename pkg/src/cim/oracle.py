"""Brute-force query answering used as the differential-testing reference.

This path never touches the compiled views or the algebra evaluator: it
materializes level members, parent-child pairs, and fact rows directly
from the store tables with nested-loop joins over row dictionaries,
then filters, groups, and aggregates in plain Python.  Its results must
match :func:`cim.query.execute` row-multiset for row-multiset.
"""

from __future__ import annotations

import decimal
import itertools

from .model import (
    CdlModel,
    Datatype,
    FragmentKind,
    Level,
    MappingFragment,
    MdlModel,
    ParentChildRel,
    SdlModel,
    Table,
    coerce_scalar,
)
from .query import (
    NAME_PROPERTY,
    AggregateFunction,
    CqlQuery,
    QueryError,
    _check_paths_mergeable,
    resolve_query,
    rollup_paths,
)
from .storage import Relation, Store


def _rows(store: Store, table: str) -> list[dict]:
    relation = store.relation(table)
    return [dict(zip(relation.columns, row)) for row in relation.rows]


def _qualified_rows(store: Store, table: str) -> list[dict]:
    relation = store.relation(table)
    names = [f"{table}.{c}" for c in relation.columns]
    return [dict(zip(names, row)) for row in relation.rows]


def _fragment_keeps(fragment: MappingFragment, table: Table, row: dict) -> bool:
    for cond in fragment.conditions:
        dtype = table.column_map()[cond.column].type
        allowed = {coerce_scalar(dtype, v) for v in cond.values}
        value = row[f"{table.name}.{cond.column}"]
        if value is None or value not in allowed:
            return False
    return True


def _fk_steps(sdl: SdlModel):
    adjacency: dict[str, list[tuple[str, tuple[tuple[str, str], ...]]]] = {t.name: [] for t in sdl.tables}
    for table in sdl.tables:
        for fk in table.foreign_keys:
            if fk.target_table not in adjacency:
                continue
            adjacency[table.name].append((fk.target_table, tuple(zip(fk.columns, fk.target_columns))))
            adjacency[fk.target_table].append((table.name, tuple(zip(fk.target_columns, fk.columns))))
    return adjacency


def _fk_path(adjacency, start: str, end: str) -> list[tuple[str, str, tuple[tuple[str, str], ...]]]:
    """One shortest (from, to, pairs) path; compilation already refused ties."""
    if start == end:
        return []
    back: dict[str, tuple[str, str, tuple]] = {}
    frontier = [start]
    seen = {start}
    while frontier and end not in seen:
        nxt = []
        for table in frontier:
            for other, pairs in adjacency[table]:
                if other in seen:
                    continue
                seen.add(other)
                back[other] = (table, other, pairs)
                nxt.append(other)
        frontier = nxt
    if end not in back:
        raise QueryError(f"no foreign-key path between {start!r} and {end!r}")
    steps = []
    at = end
    while at != start:
        step = back[at]
        steps.append(step)
        at = step[0]
    return list(reversed(steps))


def _fragment_parts(level_name: str, fragments: tuple[MappingFragment, ...], sdl: SdlModel):
    """The same alternative/complement grouping the compiler applies."""
    by_table: dict[str, list[MappingFragment]] = {}
    for frag in fragments:
        by_table.setdefault(frag.sdl_table, []).append(frag)
    group_choices = []
    group_props = []
    for table_name, group in by_table.items():
        prop_sets = [frozenset(f.mapped_properties()) for f in group]
        table = sdl.table(table_name)
        if all(ps == prop_sets[0] for ps in prop_sets):
            group_choices.append([(table, [f]) for f in group])
            group_props.append(prop_sets[0])
        else:
            group_choices.append([(table, group)])
            group_props.append(frozenset().union(*prop_sets))
    if len(group_choices) > 1 and all(ps == group_props[0] for ps in group_props):
        return [[choice] for group in group_choices for choice in group]
    return [list(combo) for combo in itertools.product(*group_choices)]


class _Materializer:
    """Fragment application by nested loops; one instance per query."""

    def __init__(self, cdl: CdlModel, sdl: SdlModel, mdl: MdlModel, store: Store):
        self.cdl = cdl
        self.sdl = sdl
        self.mdl = mdl
        self.store = store
        self.adjacency = _fk_steps(sdl)

    def level_branches(self, level: Level):
        """(rows, tables, colmap, anchor) per alternative populating the level."""
        fragments = self.mdl.fragments_for(FragmentKind.LEVEL, level.name)
        if not fragments:
            raise QueryError(f"level {level.name!r} has no mapping fragment")
        out = []
        for parts in _fragment_parts(level.name, fragments, self.sdl):
            rows, tables = self._join_parts(parts)
            colmap = {}
            for table, frags in parts:
                for frag in frags:
                    for pm in frag.property_mappings:
                        colmap[pm.property] = f"{table.name}.{pm.column}"
            anchor = {colmap[k].split(".", 1)[0] for k in level.key}.pop()
            out.append((rows, tables, colmap, anchor))
        return out

    def _part_rows(self, table: Table, frags: list[MappingFragment]) -> list[dict]:
        rows = _qualified_rows(self.store, table.name)
        return [r for r in rows if all(_fragment_keeps(f, table, r) for f in frags)]

    def _join_parts(self, parts) -> tuple[list[dict], list[str]]:
        pending = {table.name: (table, frags) for table, frags in parts}
        order = [table.name for table, _ in parts]
        table, frags = parts[0]
        pending.pop(table.name)
        rows = self._part_rows(table, frags)
        tables = [table.name]
        while pending:
            candidates = []
            for name in order:
                if name not in pending:
                    continue
                for present in tables:
                    candidates.append((len(_fk_path(self.adjacency, present, name)), name, present))
            _, target, present = min(candidates, key=lambda c: (c[0], order.index(c[1])))
            for frm, to, pairs in _fk_path(self.adjacency, present, target):
                if to in tables:
                    continue
                if to in pending:
                    inner_table, inner_frags = pending.pop(to)
                    right = self._part_rows(inner_table, inner_frags)
                else:
                    right = _qualified_rows(self.store, to)
                index: dict[tuple, list[dict]] = {}
                for row in right:
                    key = tuple(row[f"{to}.{b}"] for _a, b in pairs)
                    if None not in key:
                        index.setdefault(key, []).append(row)
                merged = []
                for row in rows:
                    key = tuple(row[f"{frm}.{a}"] for a, _b in pairs)
                    if None in key:
                        continue
                    for match in index.get(key, ()):
                        merged.append({**row, **match})
                rows = merged
                tables.append(to)
            pending.pop(target, None)
        return rows, tables

    def level_members(self, level: Level) -> list[dict]:
        """Property dictionaries for every member occurrence (a bag)."""
        members = []
        for rows, _tables, colmap, _anchor in self.level_branches(level):
            for row in rows:
                members.append({p.name: row.get(colmap.get(p.name)) for p in level.properties})
        return members

    def pc_pairs(self, rel: ParentChildRel) -> list[tuple[tuple, tuple]]:
        """(child key, parent key) value pairs, multiplicities preserved."""
        child = self.cdl.level(rel.child_level)
        parent = self.cdl.level(rel.parent_level)
        pairs_out = []
        for cb, pb in itertools.product(self.level_branches(child), self.level_branches(parent)):
            c_rows, c_tables, c_colmap, c_anchor = cb
            p_rows, p_tables, p_colmap, p_anchor = pb
            path = _fk_path(self.adjacency, c_anchor, p_anchor)
            if not path:
                anchor_pk = self.sdl.table(c_anchor).primary_key
                index: dict[tuple, list[dict]] = {}
                for row in p_rows:
                    key = tuple(row[f"{p_anchor}.{c}"] for c in anchor_pk)
                    if None not in key:
                        index.setdefault(key, []).append(row)
                joined = []
                for row in c_rows:
                    key = tuple(row[f"{c_anchor}.{c}"] for c in anchor_pk)
                    if None in key:
                        continue
                    joined.extend((row, match) for match in index.get(key, ()))
            else:
                joined = self._walk_path(c_rows, c_tables, path, p_rows, p_anchor)
            for left, right in joined:
                ck = tuple(left[c_colmap[k]] for k in child.key)
                pk = tuple(right[p_colmap[k]] for k in parent.key)
                pairs_out.append((ck, pk))
        return pairs_out

    def _walk_path(self, left_rows, left_tables, path, right_rows, right_anchor):
        """Follow FK steps from the left rows into the right rows."""
        states = [(row, {}) for row in left_rows]  # (left row, via rows by table)

        def from_value(left, vias, table, column):
            if table in vias:
                return vias[table][column]
            return left.get(f"{table}.{column}")

        for i, (frm, to, pairs) in enumerate(path):
            last = i == len(path) - 1
            if last and to == right_anchor:
                index: dict[tuple, list[dict]] = {}
                for row in right_rows:
                    key = tuple(row[f"{to}.{b}"] for _a, b in pairs)
                    if None not in key:
                        index.setdefault(key, []).append(row)
                out = []
                for left, vias in states:
                    key = tuple(from_value(left, vias, frm, a) for a, _b in pairs)
                    if None in key:
                        continue
                    out.extend((left, match) for match in index.get(key, ()))
                return out
            if to in left_tables:
                continue  # the left side already carries this table's row
            raw = _rows(self.store, to)
            index = {}
            for row in raw:
                key = tuple(row[b] for _a, b in pairs)
                if None not in key:
                    index.setdefault(key, []).append(row)
            nxt = []
            for left, vias in states:
                key = tuple(from_value(left, vias, frm, a) for a, _b in pairs)
                if None in key:
                    continue
                for match in index.get(key, ()):
                    nxt.append((left, {**vias, to: match}))
            states = nxt
        raise QueryError("foreign-key path did not end at the parent anchor")

    def fact_rows(self, query_fact: str) -> list[dict]:
        """Fact tuples with measures, properties, and role bottom keys."""
        fact = self.cdl.fact_relationship(query_fact)
        fragment = self.mdl.fragments_for(FragmentKind.FACT_RELATIONSHIP, fact.name)[0]
        table = self.sdl.table(fragment.sdl_table)
        base = [r for r in _qualified_rows(self.store, table.name) if _fragment_keeps(fragment, table, r)]

        role_branches = []
        for role in fact.roles:
            bottom = self.cdl.level(self.cdl.dimension(role.dimension).bottom_level)
            role_branches.append([(role, bottom, branch) for branch in self.level_branches(bottom)])

        out = []
        for combo in itertools.product(*role_branches):
            rows = list(base)
            for role, bottom, (b_rows, _b_tables, b_colmap, b_anchor) in combo:
                path = _fk_path(self.adjacency, table.name, b_anchor)
                if not path:
                    raise QueryError(f"role {role.name!r} resolves to the fact table itself")
                joined = self._walk_path(rows, [table.name], path, b_rows, b_anchor)
                rows = [
                    {**left, **{f"{role.name}.{k}": right[b_colmap[k]] for k in bottom.key}}
                    for left, right in joined
                ]
            for row in rows:
                values = {}
                for measure in fact.measures:
                    column = fragment.column_for(measure.name)
                    values[measure.name] = row[f"{table.name}.{column}"] if column else None
                for prop in fact.properties:
                    column = fragment.column_for(prop.name)
                    values[prop.name] = row[f"{table.name}.{column}"] if column else None
                for role, bottom, _branch in combo:
                    for k in bottom.key:
                        values[f"{role.name}.{k}"] = row[f"{role.name}.{k}"]
                out.append(values)
        return out


def oracle_execute(
    query: CqlQuery,
    cdl: CdlModel,
    sdl: SdlModel,
    mdl: MdlModel,
    store: Store,
    keep_unmentioned_grain: bool = False,
) -> Relation:
    """Answer the query without compiled views; see the module docstring."""
    query = resolve_query(query, cdl)
    fact = cdl.fact_relationship(query.fact_relationship)
    mat = _Materializer(cdl, sdl, mdl, store)
    rows = mat.fact_rows(fact.name)

    mentioned: dict[str, list[str]] = {}
    order: list[str] = []

    def mention(level_name: str, cols: list[str]):
        if level_name not in mentioned:
            mentioned[level_name] = cols
            order.append(level_name)

    roles_by_dim = {role.dimension: role for role in fact.roles}
    rolled = set()
    for dim_name, target in query.rollups:
        rolled.add(dim_name)
        role = roles_by_dim[dim_name]
        dimension = cdl.dimension(dim_name)
        bottom = cdl.level(dimension.bottom_level)
        if target == bottom.name:
            mention(bottom.name, [f"{role.name}.{k}" for k in bottom.key])
            continue
        paths = rollup_paths(cdl, dimension, target)
        _check_paths_mergeable(paths, dim_name, target)
        mapping: list[tuple[tuple, tuple]] = []
        for path in paths:
            chain = mat.pc_pairs(path[0])
            for rel in path[1:]:
                nxt = mat.pc_pairs(rel)
                index: dict[tuple, list[tuple]] = {}
                for ck, pk in nxt:
                    index.setdefault(ck, []).append(pk)
                chain = [(ck, pk2) for ck, pk1 in chain for pk2 in index.get(pk1, ())]
            mapping.extend(chain)
        index = {}
        for ck, pk in mapping:
            index.setdefault(ck, []).append(pk)
        target_level = cdl.level(target)
        target_cols = [f"{target}.{k}" for k in target_level.key]
        joined = []
        for row in rows:
            key = tuple(row[f"{role.name}.{k}"] for k in bottom.key)
            if None in key:
                continue
            for pk in index.get(key, ()):
                joined.append({**row, **dict(zip(target_cols, pk))})
        rows = joined
        mention(target, target_cols)

    for cond in query.conditions:
        if cond.level not in mentioned:
            role = next(
                (r for r in fact.roles if cdl.dimension(r.dimension).bottom_level == cond.level), None
            )
            if role is None:
                raise QueryError(f"cannot anchor condition level {cond.level!r} to the fact relationship")
            bottom = cdl.level(cond.level)
            mention(cond.level, [f"{role.name}.{k}" for k in bottom.key])

    condition_levels = {c.level for c in query.conditions}
    for level_name in order:
        level = cdl.level(level_name)
        has_name = NAME_PROPERTY in level.property_map()
        if level_name not in condition_levels and not has_name:
            continue
        needed = list(level.key)
        if has_name:
            needed.append(NAME_PROPERTY)
        for cond in query.conditions:
            if cond.level == level_name and cond.property not in needed:
                needed.append(cond.property)
        distinct = {tuple(m[p] for p in needed) for m in mat.level_members(level)}
        index = {}
        for values in distinct:
            key = values[: len(level.key)]
            if None in key:
                continue
            index.setdefault(key, []).append(values)
        cols = [f"{level_name}.{p}" for p in needed]
        joined = []
        for row in rows:
            key = tuple(row[c] for c in mentioned[level_name])
            if None in key:
                continue
            for values in index.get(key, ()):
                joined.append({**row, **dict(zip(cols, values))})
        rows = joined
        mentioned[level_name] = cols[: len(level.key)]

    for cond in query.conditions:
        column = f"{cond.level}.{cond.property}"
        kept = []
        for row in rows:
            value = row[column]
            if value is None:
                continue
            if cond.operator.value in ("equals", "in"):
                if value in cond.values:
                    kept.append(row)
            elif cond.operator.value == "less-than":
                if value < cond.values[0]:
                    kept.append(row)
            elif value > cond.values[0]:
                kept.append(row)
        rows = kept

    group_cols: list[tuple[str, Datatype]] = []
    group_sources: list[str] = []
    for level_name in order:
        level = cdl.level(level_name)
        props = level.property_map()
        joined_level = level_name in condition_levels or NAME_PROPERTY in props
        for k, source in zip(level.key, mentioned[level_name]):
            group_cols.append((f"{level_name}.{k}", props[k].type))
            group_sources.append(f"{level_name}.{k}" if joined_level else source)
        if joined_level and NAME_PROPERTY in props:
            group_cols.append((f"{level_name}.{NAME_PROPERTY}", props[NAME_PROPERTY].type))
            group_sources.append(f"{level_name}.{NAME_PROPERTY}")

    if keep_unmentioned_grain:
        for role in fact.roles:
            if role.dimension in rolled:
                continue
            bottom = cdl.level(cdl.dimension(role.dimension).bottom_level)
            if bottom.name in mentioned:
                continue
            for k in bottom.key:
                group_cols.append((f"{role.name}.{k}", bottom.property_map()[k].type))
                group_sources.append(f"{role.name}.{k}")

    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        groups.setdefault(tuple(row[s] for s in group_sources), []).append(row)
    if not groups and not group_cols:
        groups[()] = []

    if query.function is AggregateFunction.COUNT:
        agg_name, agg_type = "count", Datatype.INTEGER
    else:
        measure_type = fact.measure_map()[query.measure].type
        agg_type = Datatype.DECIMAL if query.function is AggregateFunction.AVG else measure_type
        agg_name = f"{query.function.value}({query.measure})"

    out_rows = []
    for key, members in groups.items():
        if query.function is AggregateFunction.COUNT:
            value = len(members)
        else:
            observed = [m[query.measure] for m in members if m[query.measure] is not None]
            if not observed:
                value = None
            elif query.function is AggregateFunction.SUM:
                value = sum(observed)
            elif query.function is AggregateFunction.AVG:
                value = decimal.Decimal(sum(observed)) / decimal.Decimal(len(observed))
            elif query.function is AggregateFunction.MIN:
                value = min(observed)
            else:
                value = max(observed)
        out_rows.append(key + (value,))

    schema = tuple(group_cols) + ((agg_name, agg_type),)
    return Relation(schema=schema, rows=out_rows)
