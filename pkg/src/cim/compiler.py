"""Compiles (CDL, MDL, SDL) into relational view definitions.

One view is produced per mapped level, per parent-child relationship
with mapped endpoints, and per mapped fact relationship.  Views are
sound by construction: every fragment condition is applied inside the
view body, so a view can only produce tuples that belong to its
conceptual element.

Multi-fragment levels combine as follows: fragments mapping the same
property set populate alternatives and are unioned; fragments mapping
disjoint property sets complement each other and are joined along the
shortest foreign-key path between their tables (ambiguous or missing
paths are compile errors, never guesses).

The instance-level checks (exclusivity, cardinalities,
summarizability) evaluate the compiled parent-child views against a
loaded store and report witnesses.
"""

from __future__ import annotations

import itertools
import json
from collections import Counter
from dataclasses import dataclass, field

from .model import (
    CdlModel,
    Condition,
    Diagnostic,
    FactRelationship,
    FragmentKind,
    Level,
    MappingFragment,
    MdlModel,
    ParentChildRel,
    SdlModel,
    Severity,
    Table,
    coerce_scalar,
)
from .storage import (
    And,
    Comparison,
    ComparisonOp,
    Join,
    Plan,
    PlanError,
    Project,
    ProjectItem,
    Relation,
    Rename,
    Scan,
    Select,
    Store,
    Union,
    Violation,
    evaluate,
    output_schema,
    plan_to_dict,
)

VIEWSET_FORMAT_VERSION = 1


@dataclass(frozen=True)
class ViewTarget:
    kind: str  # "level" | "parentChild" | "factRelationship"
    name: str
    child_level: str | None = None
    parent_level: str | None = None

    @property
    def id(self) -> str:
        return f"{self.kind}:{self.name}"

    @classmethod
    def for_level(cls, name: str) -> "ViewTarget":
        return cls(kind="level", name=name)

    @classmethod
    def for_relationship(cls, rel: ParentChildRel) -> "ViewTarget":
        return cls(
            kind="parentChild",
            name=f"{rel.child_level}->{rel.parent_level}",
            child_level=rel.child_level,
            parent_level=rel.parent_level,
        )

    @classmethod
    def for_fact(cls, name: str) -> "ViewTarget":
        return cls(kind="factRelationship", name=name)


@dataclass(frozen=True)
class ViewDefinition:
    target: ViewTarget
    body: Plan


@dataclass
class CompileResult:
    views: list[ViewDefinition]
    diagnostics: list[Diagnostic]

    def view(self, target_id: str) -> ViewDefinition | None:
        return next((v for v in self.views if v.target.id == target_id), None)

    @property
    def ok(self) -> bool:
        return not any(d.severity is Severity.ERROR for d in self.diagnostics)


class _SchemaOnly:
    """Store stand-in letting plans type-check without loaded data."""

    def __init__(self, sdl: SdlModel):
        self._relations = {
            t.name: Relation(schema=tuple((c.name, c.type) for c in t.columns), rows=[]) for t in sdl.tables
        }

    def relation(self, name: str) -> Relation:
        if name not in self._relations:
            raise PlanError(f"table {name!r} is not declared")
        return self._relations[name]


# ---------------------------------------------------------------------------
# Foreign-key path finding


class PathError(Exception):
    def __init__(self, kind: str, message: str):
        self.kind = kind  # "no-join-path" | "ambiguous-join-path"
        super().__init__(message)


@dataclass(frozen=True)
class _Step:
    from_table: str
    to_table: str
    pairs: tuple[tuple[str, str], ...]  # (from column, to column)


class FkGraph:
    """Undirected view of the SDL's foreign keys; FKs join both ways."""

    def __init__(self, sdl: SdlModel):
        self._adjacency: dict[str, list[_Step]] = {t.name: [] for t in sdl.tables}
        for table in sdl.tables:
            for fk in table.foreign_keys:
                if fk.target_table not in self._adjacency:
                    continue
                forward = tuple(zip(fk.columns, fk.target_columns))
                backward = tuple(zip(fk.target_columns, fk.columns))
                self._adjacency[table.name].append(_Step(table.name, fk.target_table, forward))
                self._adjacency[fk.target_table].append(_Step(fk.target_table, table.name, backward))

    def shortest_path(self, start: str, end: str) -> list[_Step]:
        """The unique shortest join path; raises PathError otherwise."""
        if start == end:
            return []
        if start not in self._adjacency or end not in self._adjacency:
            raise PathError("no-join-path", f"no join path between {start!r} and {end!r}")
        distance = {start: 0}
        frontier = [start]
        while frontier:
            nxt = []
            for table in frontier:
                for step in self._adjacency[table]:
                    if step.to_table not in distance:
                        distance[step.to_table] = distance[table] + 1
                        nxt.append(step.to_table)
            frontier = nxt
        if end not in distance:
            raise PathError("no-join-path", f"no join path between {start!r} and {end!r}")

        paths: list[list[_Step]] = []

        def walk(table: str, acc: list[_Step]):
            if table == end:
                paths.append(list(acc))
                return
            for step in self._adjacency[table]:
                if distance.get(step.to_table) == distance[table] + 1:
                    acc.append(step)
                    walk(step.to_table, acc)
                    acc.pop()

        walk(start, [])
        if len(paths) > 1:
            raise PathError(
                "ambiguous-join-path",
                f"{len(paths)} equally short join paths between {start!r} and {end!r}",
            )
        return paths[0]


# ---------------------------------------------------------------------------
# Branch construction


@dataclass
class _Branch:
    """One join tree of fragment tables populating (part of) a level."""

    tables: list[str] = field(default_factory=list)
    plan: Plan | None = None
    colmap: dict[str, str] = field(default_factory=dict)  # property -> qualified column
    anchor: str | None = None  # table carrying the level's key columns


class CompileError(Exception):
    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(message)


def _qualified_scan(table: Table) -> Plan:
    return Rename(Scan(table.name), tuple((c.name, f"{table.name}.{c.name}") for c in table.columns))


def _condition_predicate(table: Table, conditions: tuple[Condition, ...]) -> Comparison | And | None:
    parts = []
    for cond in conditions:
        column = table.column_map()[cond.column]
        values = tuple(coerce_scalar(column.type, v) for v in cond.values)
        name = f"{table.name}.{cond.column}"
        parts.append(Comparison(column=name, op=ComparisonOp(cond.operator.value), values=values))
    if not parts:
        return None
    return parts[0] if len(parts) == 1 else And(tuple(parts))


def _fragment_plan(table: Table, fragments: list[MappingFragment]) -> Plan:
    plan = _qualified_scan(table)
    conditions = tuple(c for f in fragments for c in f.conditions)
    predicate = _condition_predicate(table, conditions)
    return Select(plan, predicate) if predicate is not None else plan


def _branch_from_parts(parts: list[tuple[Table, list[MappingFragment]]], sdl: SdlModel, graph: FkGraph) -> _Branch:
    """Join the fragment tables (plus any FK-path intermediates) into one tree."""
    branch = _Branch()
    pending = {table.name: (table, frags) for table, frags in parts}
    order = [table.name for table, _ in parts]
    table, frags = parts[0]
    pending.pop(table.name, None)
    branch.plan = _fragment_plan(table, frags)
    branch.tables = [table.name]

    while pending:
        # Attach the closest remaining fragment table; a tie between two
        # attachment points is ambiguous and refused.
        candidates = []
        for name in order:
            if name not in pending:
                continue
            for present in branch.tables:
                candidates.append((len(graph.shortest_path(present, name)), name, present))
        shortest = min(c[0] for c in candidates)
        at_min = [c for c in candidates if c[0] == shortest]
        _, target_name, present = at_min[0]
        routes = [c for c in at_min if c[1] == target_name]
        if len(routes) > 1:
            raise PathError(
                "ambiguous-join-path",
                f"table {target_name!r} joins the fragment tree equally well in {len(routes)} ways",
            )
        for step in graph.shortest_path(present, target_name):
            name = step.to_table
            if name in branch.tables:
                continue
            if name in pending:
                inner_table, inner_frags = pending.pop(name)
                right = _fragment_plan(inner_table, inner_frags)
            else:
                right = _qualified_scan(_table_of(sdl, name))
            pairs = tuple((f"{step.from_table}.{a}", f"{step.to_table}.{b}") for a, b in step.pairs)
            branch.plan = Join(branch.plan, right, pairs)
            branch.tables.append(name)
        pending.pop(target_name, None)
    return branch


def _table_of(sdl: SdlModel, name: str) -> Table:
    table = sdl.table(name)
    if table is None:
        raise CompileError("unknown-table", f"table {name!r} is not declared")
    return table


def _level_branches(level: Level, fragments: tuple[MappingFragment, ...], sdl: SdlModel, graph: FkGraph) -> list[_Branch]:
    """All alternative join trees whose union populates the level."""
    if not fragments:
        raise CompileError("unmapped-level", f"level {level.name!r} has no mapping fragment")

    by_table: dict[str, list[MappingFragment]] = {}
    for frag in fragments:
        by_table.setdefault(frag.sdl_table, []).append(frag)

    # Within one table: identical property sets are alternatives (union),
    # differing ones complement each other (conditions ANDed).
    group_choices: list[list[tuple[Table, list[MappingFragment]]]] = []
    group_props: list[frozenset[str]] = []
    for table_name, group in by_table.items():
        table = _table_of(sdl, table_name)
        prop_sets = [frozenset(f.mapped_properties()) for f in group]
        if all(ps == prop_sets[0] for ps in prop_sets):
            group_choices.append([(table, [f]) for f in group])
            group_props.append(prop_sets[0])
        elif _pairwise_disjoint(prop_sets):
            group_choices.append([(table, group)])
            group_props.append(frozenset().union(*prop_sets))
        else:
            raise CompileError(
                "inconsistent-fragments",
                f"level {level.name!r}: fragments on table {table_name!r} map overlapping "
                "but different property sets",
            )

    if len(group_choices) > 1:
        if all(ps == group_props[0] for ps in group_props):
            # Same properties from different tables: union of alternatives.
            choices = [choice for group in group_choices for choice in group]
            combos = [[choice] for choice in choices]
        elif _pairwise_disjoint(group_props):
            combos = [list(combo) for combo in itertools.product(*group_choices)]
        else:
            raise CompileError(
                "inconsistent-fragments",
                f"level {level.name!r}: fragments map overlapping but different property sets "
                "across tables",
            )
    else:
        combos = [list(combo) for combo in itertools.product(*group_choices)]

    branches = []
    for combo in combos:
        branch = _branch_from_parts(combo, sdl, graph)
        for table, frags in combo:
            for frag in frags:
                for pm in frag.property_mappings:
                    branch.colmap[pm.property] = f"{table.name}.{pm.column}"
        missing = [k for k in level.key if k not in branch.colmap]
        if missing:
            raise CompileError(
                "unmapped-key",
                f"level {level.name!r}: key properties not mapped: {', '.join(missing)}",
            )
        anchor_tables = {branch.colmap[k].split(".", 1)[0] for k in level.key}
        if len(anchor_tables) != 1:
            raise CompileError(
                "split-key",
                f"level {level.name!r}: key properties are mapped across several tables",
            )
        branch.anchor = anchor_tables.pop()
        branches.append(branch)
    return branches


def _pairwise_disjoint(sets) -> bool:
    total = Counter()
    for s in sets:
        total.update(s)
    return all(count == 1 for count in total.values())


def _level_view_plan(level: Level, branches: list[_Branch]) -> Plan:
    plans = []
    for branch in branches:
        items = []
        for prop in level.properties:
            source = branch.colmap.get(prop.name)
            if source is not None:
                items.append(ProjectItem(name=prop.name, source=source))
            else:
                items.append(ProjectItem(name=prop.name, null_type=prop.type))
        plans.append(Project(branch.plan, tuple(items)))
    return plans[0] if len(plans) == 1 else Union(tuple(plans))


def _prefix_plan(plan: Plan, prefix: str, schema_store) -> tuple[Plan, dict[str, str]]:
    schema = output_schema(plan, schema_store)
    mapping = {name: f"{prefix}{name}" for name, _ in schema}
    return Rename(plan, tuple(mapping.items())), mapping


def _relationship_view_plan(
    rel: ParentChildRel,
    child: Level,
    parent: Level,
    child_branches: list[_Branch],
    parent_branches: list[_Branch],
    sdl: SdlModel,
    graph: FkGraph,
    schema_store,
) -> Plan:
    """(child key, parent key) pairs, joined along the FK path."""
    plans = []
    for cb, pb in itertools.product(child_branches, parent_branches):
        left, left_map = _prefix_plan(cb.plan, "c~", schema_store)
        right, right_map = _prefix_plan(pb.plan, "p~", schema_store)
        path = graph.shortest_path(cb.anchor, pb.anchor)
        plan = left
        if not path:
            # Same anchor table: child and parent members share rows.
            anchor = _table_of(sdl, cb.anchor)
            pairs = tuple(
                (left_map[f"{cb.anchor}.{col}"], right_map[f"{pb.anchor}.{col}"]) for col in anchor.primary_key
            )
            plan = Join(plan, right, pairs)
        else:
            present = set(cb.tables)
            for step in path:
                from_col = lambda c: (left_map.get(f"{step.from_table}.{c}") or f"v~{step.from_table}.{c}")
                if step.to_table == pb.anchor:
                    pairs = tuple(
                        (from_col(a), right_map[f"{step.to_table}.{b}"]) for a, b in step.pairs
                    )
                    plan = Join(plan, right, pairs)
                elif step.to_table not in present:
                    via_table = _table_of(sdl, step.to_table)
                    via, via_map = _prefix_plan(_qualified_scan(via_table), "v~", schema_store)
                    pairs = tuple(
                        (from_col(a), via_map[f"{step.to_table}.{b}"]) for a, b in step.pairs
                    )
                    plan = Join(plan, via, pairs)
                    present.add(step.to_table)
                    left_map.update(via_map)
        items = [ProjectItem(name=f"{child.name}.{k}", source=left_map[cb.colmap[k]]) for k in child.key]
        items += [ProjectItem(name=f"{parent.name}.{k}", source=right_map[pb.colmap[k]]) for k in parent.key]
        plans.append(Project(plan, tuple(items)))
    return plans[0] if len(plans) == 1 else Union(tuple(plans))


def _fact_view_plan(
    fact: FactRelationship,
    fragment: MappingFragment,
    cdl: CdlModel,
    sdl: SdlModel,
    graph: FkGraph,
    bottom_branches: dict[str, list[_Branch]],
    schema_store,
) -> Plan:
    """Fact rows with measures renamed and roles resolved to bottom keys."""
    fact_table = _table_of(sdl, fragment.sdl_table)
    base = _fragment_plan(fact_table, [fragment])

    role_choices = []
    for role in fact.roles:
        dimension = cdl.dimension(role.dimension)
        role_choices.append([(role, branch) for branch in bottom_branches[dimension.bottom_level]])

    plans = []
    for combo in itertools.product(*role_choices):
        plan = base
        known = {f"{fact_table.name}.{c.name}" for c in fact_table.columns}
        key_sources: dict[str, dict[str, str]] = {}
        for role, branch in combo:
            prefix = f"{role.name}~"
            side, side_map = _prefix_plan(branch.plan, prefix, schema_store)
            path = graph.shortest_path(fact_table.name, branch.anchor)
            if not path:
                raise CompileError(
                    "no-join-path",
                    f"fact relationship {fact.name!r}: role {role.name!r} resolves to the fact table itself",
                )
            present = {fact_table.name}
            for step in path:
                from_col = lambda c: (
                    f"{step.from_table}.{c}"
                    if f"{step.from_table}.{c}" in known
                    else f"{prefix}v~{step.from_table}.{c}"
                )
                if step.to_table == branch.anchor:
                    pairs = tuple((from_col(a), side_map[f"{step.to_table}.{b}"]) for a, b in step.pairs)
                    plan = Join(plan, side, pairs)
                elif step.to_table not in present:
                    via_table = _table_of(sdl, step.to_table)
                    via, via_map = _prefix_plan(_qualified_scan(via_table), f"{prefix}v~", schema_store)
                    pairs = tuple((from_col(a), via_map[f"{step.to_table}.{b}"]) for a, b in step.pairs)
                    plan = Join(plan, via, pairs)
                    present.add(step.to_table)
            bottom = cdl.level(cdl.dimension(role.dimension).bottom_level)
            key_sources[role.name] = {k: side_map[branch.colmap[k]] for k in bottom.key}

        items = []
        for measure in fact.measures:
            column = fragment.column_for(measure.name)
            if column is not None:
                items.append(ProjectItem(name=measure.name, source=f"{fact_table.name}.{column}"))
            else:
                items.append(ProjectItem(name=measure.name, null_type=measure.type))
        for prop in fact.properties:
            column = fragment.column_for(prop.name)
            if column is not None:
                items.append(ProjectItem(name=prop.name, source=f"{fact_table.name}.{column}"))
            else:
                items.append(ProjectItem(name=prop.name, null_type=prop.type))
        for role, _branch in combo:
            bottom = cdl.level(cdl.dimension(role.dimension).bottom_level)
            for k in bottom.key:
                items.append(ProjectItem(name=f"{role.name}.{k}", source=key_sources[role.name][k]))
        plans.append(Project(plan, tuple(items)))
    return plans[0] if len(plans) == 1 else Union(tuple(plans))


def compile_views(cdl: CdlModel, sdl: SdlModel, mdl: MdlModel) -> CompileResult:
    """Produce one view per mapped level, parent-child rel, and fact rel.

    Assumes the three validations are clean.  Problems that prevent a
    particular view are reported as error diagnostics; all remaining
    views are still compiled.
    """
    graph = FkGraph(sdl)
    schema_store = _SchemaOnly(sdl)
    views: list[ViewDefinition] = []
    diagnostics: list[Diagnostic] = []
    branches: dict[str, list[_Branch]] = {}

    def report(code: str, path: str, message: str):
        diagnostics.append(Diagnostic(code=code, severity=Severity.ERROR, path=path, message=message))

    for level in cdl.levels:
        fragments = mdl.fragments_for(FragmentKind.LEVEL, level.name)
        try:
            branches[level.name] = _level_branches(level, fragments, sdl, graph)
            views.append(
                ViewDefinition(
                    target=ViewTarget.for_level(level.name),
                    body=_level_view_plan(level, branches[level.name]),
                )
            )
        except CompileError as exc:
            report(exc.code, f"cdl/level/{level.name}", str(exc))
        except PathError as exc:
            report(exc.kind, f"cdl/level/{level.name}", str(exc))

    seen_rels: list[tuple[str, str]] = []
    for hierarchy in cdl.hierarchies:
        for rel in hierarchy.relationships:
            pair = (rel.child_level, rel.parent_level)
            if pair in seen_rels:
                continue
            seen_rels.append(pair)
            if rel.child_level not in branches or rel.parent_level not in branches:
                continue  # endpoint already diagnosed
            target = ViewTarget.for_relationship(rel)
            try:
                body = _relationship_view_plan(
                    rel,
                    cdl.level(rel.child_level),
                    cdl.level(rel.parent_level),
                    branches[rel.child_level],
                    branches[rel.parent_level],
                    sdl,
                    graph,
                    schema_store,
                )
                views.append(ViewDefinition(target=target, body=body))
            except CompileError as exc:
                report(exc.code, f"cdl/parent-child/{target.name}", str(exc))
            except PathError as exc:
                report(exc.kind, f"cdl/parent-child/{target.name}", str(exc))

    for fact in cdl.fact_relationships:
        fragments = mdl.fragments_for(FragmentKind.FACT_RELATIONSHIP, fact.name)
        path = f"cdl/fact-relationship/{fact.name}"
        if not fragments:
            report("unmapped-fact-relationship", path, f"fact relationship {fact.name!r} has no mapping fragment")
            continue
        if len(fragments) > 1:
            report(
                "multi-fragment-fact-relationship",
                path,
                f"fact relationship {fact.name!r} is mapped by {len(fragments)} fragments; exactly one is supported",
            )
            continue
        missing = [
            cdl.dimension(role.dimension).bottom_level
            for role in fact.roles
            if cdl.dimension(role.dimension).bottom_level not in branches
        ]
        if missing:
            report(
                "unmapped-bottom-level",
                path,
                f"fact relationship {fact.name!r}: bottom levels without views: {', '.join(sorted(set(missing)))}",
            )
            continue
        try:
            bottoms = {
                cdl.dimension(role.dimension).bottom_level: branches[cdl.dimension(role.dimension).bottom_level]
                for role in fact.roles
            }
            body = _fact_view_plan(fact, fragments[0], cdl, sdl, graph, bottoms, schema_store)
            views.append(ViewDefinition(target=ViewTarget.for_fact(fact.name), body=body))
        except CompileError as exc:
            report(exc.code, path, str(exc))
        except PathError as exc:
            report(exc.kind, path, str(exc))

    for view in views:  # compile-time type check; a failure here is a planner bug
        output_schema(view.body, schema_store)
    return CompileResult(views=views, diagnostics=diagnostics)


# ---------------------------------------------------------------------------
# View-set document


def views_to_dict(result: CompileResult, sdl: SdlModel) -> dict:
    schema_store = _SchemaOnly(sdl)
    views = []
    for view in result.views:
        schema = output_schema(view.body, schema_store)
        entry = {
            "target": {"id": view.target.id, "kind": view.target.kind, "name": view.target.name},
            "columns": [{"name": name, "type": dtype.value} for name, dtype in schema],
            "plan": plan_to_dict(view.body),
        }
        if view.target.kind == "parentChild":
            entry["target"]["childLevel"] = view.target.child_level
            entry["target"]["parentLevel"] = view.target.parent_level
        views.append(entry)
    return {
        "formatVersion": VIEWSET_FORMAT_VERSION,
        "views": views,
        "diagnostics": [
            {"code": d.code, "severity": d.severity.value, "path": d.path, "message": d.message}
            for d in result.diagnostics
        ],
    }


def views_to_json(result: CompileResult, sdl: SdlModel) -> bytes:
    return json.dumps(views_to_dict(result, sdl), indent=2, ensure_ascii=False).encode("utf-8")


def materialize_views(views, store: Store) -> dict[str, Relation]:
    """Frozen snapshots of every view, keyed by target id."""
    return {view.target.id: evaluate(view.body, store) for view in views}


# ---------------------------------------------------------------------------
# Instance-level checks


def _view_lookup(views) -> dict[str, ViewDefinition]:
    if isinstance(views, CompileResult):
        views = views.views
    return {view.target.id: view for view in views}


def _distinct_pairs(relation: Relation, child_arity: int) -> set[tuple]:
    return {(row[:child_arity], row[child_arity:]) for row in relation.rows}


def check_exclusivity(cdl: CdlModel, views, store: Store) -> list[Violation]:
    """Each child instance may appear in at most one view per exclusive group."""
    lookup = _view_lookup(views)
    out: list[Violation] = []
    groups: dict[str, list[ParentChildRel]] = {}
    for rel in cdl.all_relationships():
        if rel.exclusive_group is not None:
            members = groups.setdefault(rel.exclusive_group, [])
            if rel not in members:
                members.append(rel)
    for group in sorted(groups):
        appearances: dict[tuple, list[str]] = {}
        for rel in groups[group]:
            target = ViewTarget.for_relationship(rel)
            view = lookup.get(target.id)
            if view is None:
                continue
            child_arity = len(cdl.level(rel.child_level).key)
            for child_key, _parent_key in _distinct_pairs(evaluate(view.body, store), child_arity):
                rels = appearances.setdefault(child_key, [])
                if target.name not in rels:
                    rels.append(target.name)
        for child_key in sorted(appearances, key=lambda k: tuple(map(str, k))):
            rels = appearances[child_key]
            if len(rels) > 1:
                out.append(
                    Violation(
                        code="exclusivity-overlap",
                        subject=f"group {group}",
                        message=f"child {child_key!r} appears in {len(rels)} relationships of exclusive group {group!r}",
                        details={"group": group, "childKey": list(map(str, child_key)), "relationships": rels},
                    )
                )
    return out


def _member_keys(level: Level, view: ViewDefinition, store: Store) -> set[tuple]:
    relation = evaluate(view.body, store)
    idx = [relation.index_of(k) for k in level.key]
    return {tuple(row[i] for i in idx) for row in relation.rows}


def check_cardinalities(cdl: CdlModel, views, store: Store) -> list[Violation]:
    """Count parents per child and children per parent against the bounds."""
    lookup = _view_lookup(views)
    out: list[Violation] = []
    seen: list[tuple[str, str]] = []
    for rel in cdl.all_relationships():
        pair = (rel.child_level, rel.parent_level)
        if pair in seen:
            continue
        seen.append(pair)
        target = ViewTarget.for_relationship(rel)
        view = lookup.get(target.id)
        child = cdl.level(rel.child_level)
        parent = cdl.level(rel.parent_level)
        child_view = lookup.get(f"level:{rel.child_level}")
        parent_view = lookup.get(f"level:{rel.parent_level}")
        if view is None or child_view is None or parent_view is None:
            continue
        pairs = _distinct_pairs(evaluate(view.body, store), len(child.key))

        parents_of: dict[tuple, int] = Counter()
        children_of: dict[tuple, int] = Counter()
        for child_key, parent_key in pairs:
            parents_of[child_key] += 1
            children_of[parent_key] += 1

        def bound_violation(member, count, card, level_name, side):
            if count < card.min or (card.max is not None and count > card.max):
                out.append(
                    Violation(
                        code="cardinality",
                        subject=target.name,
                        message=(
                            f"{level_name} member {member!r} has {count} {side}, outside {card}"
                        ),
                        details={
                            "relationship": target.name,
                            "level": level_name,
                            "member": list(map(str, member)),
                            "count": count,
                            "bound": str(card),
                            "side": side,
                        },
                    )
                )

        for member in sorted(_member_keys(child, child_view, store), key=lambda k: tuple(map(str, k))):
            bound_violation(member, parents_of.get(member, 0), rel.parent_card, rel.child_level, "parents")
        for member in sorted(_member_keys(parent, parent_view, store), key=lambda k: tuple(map(str, k))):
            bound_violation(member, children_of.get(member, 0), rel.child_card, rel.parent_level, "children")
    return out


@dataclass
class HierarchyReport:
    dimension: str
    hierarchy: str
    summarizable: bool
    non_strict: list[Violation]
    non_covering: list[Violation]

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "hierarchy": self.hierarchy,
            "summarizable": self.summarizable,
            "nonStrict": [v.to_dict() for v in self.non_strict],
            "nonCovering": [v.to_dict() for v in self.non_covering],
        }


@dataclass
class SummarizabilityReport:
    entries: list[HierarchyReport]

    @property
    def summarizable(self) -> bool:
        return all(entry.summarizable for entry in self.entries)

    def to_dict(self) -> dict:
        return {"summarizable": self.summarizable, "hierarchies": [e.to_dict() for e in self.entries]}


def check_summarizability(cdl: CdlModel, views, store: Store) -> SummarizabilityReport:
    """Detect non-strict and non-covering roll-up data per hierarchy.

    Strictness: within one relationship no child has more than one
    parent.  Covering: on relationships whose parent cardinality
    requires a parent (min 1), every child member has one.  Hierarchies
    failing either are reported non-summarizable with witnesses.
    """
    lookup = _view_lookup(views)
    entries: list[HierarchyReport] = []
    for dim in cdl.dimensions:
        named = dim.hierarchies or (None,)
        for hname in named:
            if hname is None:
                rels = cdl.dimension_relationships(dim)
                label = "(implicit)"
            else:
                hierarchy = cdl.hierarchy(hname)
                rels = hierarchy.relationships if hierarchy else ()
                label = hname
            non_strict: list[Violation] = []
            non_covering: list[Violation] = []
            for rel in rels:
                target = ViewTarget.for_relationship(rel)
                view = lookup.get(target.id)
                child = cdl.level(rel.child_level)
                child_view = lookup.get(f"level:{rel.child_level}")
                if view is None or child_view is None:
                    continue
                pairs = _distinct_pairs(evaluate(view.body, store), len(child.key))
                parents: dict[tuple, list[tuple]] = {}
                for child_key, parent_key in pairs:
                    parents.setdefault(child_key, []).append(parent_key)
                for child_key in sorted(parents, key=lambda k: tuple(map(str, k))):
                    if len(parents[child_key]) > 1:
                        non_strict.append(
                            Violation(
                                code="non-strict",
                                subject=target.name,
                                message=f"child {child_key!r} has {len(parents[child_key])} parents in {target.name}",
                                details={
                                    "relationship": target.name,
                                    "childKey": list(map(str, child_key)),
                                    "parentKeys": [list(map(str, p)) for p in sorted(parents[child_key], key=str)],
                                },
                            )
                        )
                if rel.parent_card.min >= 1:
                    for member in sorted(_member_keys(child, child_view, store), key=lambda k: tuple(map(str, k))):
                        if member not in parents:
                            non_covering.append(
                                Violation(
                                    code="non-covering",
                                    subject=target.name,
                                    message=f"child {member!r} has no parent in mandatory {target.name}",
                                    details={"relationship": target.name, "childKey": list(map(str, member))},
                                )
                            )
            entries.append(
                HierarchyReport(
                    dimension=dim.name,
                    hierarchy=label,
                    summarizable=not non_strict and not non_covering,
                    non_strict=non_strict,
                    non_covering=non_covering,
                )
            )
    return SummarizabilityReport(entries=entries)
