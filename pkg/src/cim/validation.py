"""Structural validation for CDL, SDL, and MDL models.

Each validator returns diagnostics rather than raising: malformed input
that cannot even be represented is a parser concern, while everything
representable is checked here.  Validation is deterministic and
order-independent; permuting the input sets permutes nothing but the
order of the returned list.
"""

from __future__ import annotations

from collections import Counter

from .model import (
    CdlModel,
    Condition,
    Diagnostic,
    FragmentKind,
    MdlModel,
    SdlModel,
    Severity,
    coerce_scalar,
)


def _dupes(names) -> list[str]:
    return sorted(name for name, count in Counter(names).items() if count > 1)


def _err(code: str, path: str, message: str) -> Diagnostic:
    return Diagnostic(code=code, severity=Severity.ERROR, path=path, message=message)


def validate_cdl(model: CdlModel) -> list[Diagnostic]:
    """Check every CDL invariant; an empty list means the model is clean."""
    out: list[Diagnostic] = []
    level_names = {l.name for l in model.levels}
    hierarchy_names = {h.name for h in model.hierarchies}
    dimension_names = {d.name for d in model.dimensions}

    for kind, names in (
        ("level", [l.name for l in model.levels]),
        ("dimension", [d.name for d in model.dimensions]),
        ("hierarchy", [h.name for h in model.hierarchies]),
        ("fact-relationship", [f.name for f in model.fact_relationships]),
    ):
        for name in _dupes(names):
            out.append(_err("duplicate-name", f"cdl/{kind}/{name}", f"{kind} name {name!r} declared more than once"))

    for level in model.levels:
        path = f"cdl/level/{level.name}"
        for name in _dupes(p.name for p in level.properties):
            out.append(_err("duplicate-property", path, f"property {name!r} declared more than once"))
        if not level.key:
            out.append(_err("empty-key", path, "level key must name at least one property"))
        props = {p.name for p in level.properties}
        for key_prop in level.key:
            if key_prop not in props:
                out.append(_err("key-not-a-property", path, f"key entry {key_prop!r} is not a property of level {level.name!r}"))

    for dim in model.dimensions:
        path = f"cdl/dimension/{dim.name}"
        if dim.bottom_level not in level_names:
            out.append(_err("unresolved-bottom-level", path, f"bottom level {dim.bottom_level!r} is not a declared level"))
        for hname in dim.hierarchies:
            hierarchy = model.hierarchy(hname)
            if hierarchy is None:
                out.append(_err("unresolved-hierarchy", path, f"hierarchy {hname!r} is not declared"))
            elif not hierarchy.relationships or hierarchy.relationships[0].child_level != dim.bottom_level:
                out.append(
                    _err(
                        "hierarchy-not-rooted-at-bottom",
                        path,
                        f"hierarchy {hname!r} must start at bottom level {dim.bottom_level!r}",
                    )
                )

    for hierarchy in model.hierarchies:
        path = f"cdl/hierarchy/{hierarchy.name}"
        for i, rel in enumerate(hierarchy.relationships):
            rel_path = f"{path}/rel[{i}]"
            if rel.child_level == rel.parent_level:
                out.append(_err("self-relationship", rel_path, f"child and parent level are both {rel.child_level!r}"))
            for end, name in (("child", rel.child_level), ("parent", rel.parent_level)):
                if name not in level_names:
                    out.append(_err("unresolved-level", rel_path, f"{end} level {name!r} is not declared"))
        out.extend(_check_hierarchy_graph(hierarchy.name, hierarchy.relationships, path))

    for fact in model.fact_relationships:
        path = f"cdl/fact-relationship/{fact.name}"
        if len(fact.roles) < 2:
            out.append(_err("too-few-roles", path, "a fact relationship needs at least two roles"))
        for name in _dupes(r.name for r in fact.roles):
            out.append(_err("duplicate-role", path, f"role {name!r} declared more than once"))
        for role in fact.roles:
            if role.dimension not in dimension_names:
                out.append(_err("unresolved-dimension", f"{path}/role/{role.name}", f"dimension {role.dimension!r} is not declared"))
        for name in _dupes(p.name for p in list(fact.measures) + list(fact.properties)):
            out.append(_err("duplicate-property", path, f"measure/property {name!r} declared more than once"))

    groups = Counter(
        rel.exclusive_group for rel in model.all_relationships() if rel.exclusive_group is not None
    )
    for group, count in sorted(groups.items()):
        if count < 2:
            out.append(
                _err(
                    "single-member-exclusive-group",
                    f"cdl/exclusive-group/{group}",
                    f"exclusive group {group!r} has only one relationship",
                )
            )
    return out


def _check_hierarchy_graph(name, relationships, path) -> list[Diagnostic]:
    out = []
    if not relationships:
        return out
    # Connectivity over the undirected view of the child->parent edges.
    levels = {rel.child_level for rel in relationships} | {rel.parent_level for rel in relationships}
    adjacency: dict[str, set[str]] = {l: set() for l in levels}
    for rel in relationships:
        adjacency[rel.child_level].add(rel.parent_level)
        adjacency[rel.parent_level].add(rel.child_level)
    start = relationships[0].child_level
    seen = {start}
    stack = [start]
    while stack:
        for nxt in adjacency[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    if seen != levels:
        missing = ", ".join(sorted(levels - seen))
        out.append(_err("disconnected-hierarchy", path, f"levels not connected to the rest: {missing}"))

    parents: dict[str, set[str]] = {}
    for rel in relationships:
        parents.setdefault(rel.child_level, set()).add(rel.parent_level)
    state: dict[str, int] = {}  # 1 = on stack, 2 = done

    def visit(level: str) -> bool:
        state[level] = 1
        for parent in parents.get(level, ()):
            mark = state.get(parent)
            if mark == 1:
                return True
            if mark is None and visit(parent):
                return True
        state[level] = 2
        return False

    for level in sorted(levels):
        if level not in state and visit(level):
            out.append(_err("cyclic-hierarchy", path, "child-to-parent relations form a cycle"))
            break
    return out


def validate_sdl(model: SdlModel) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    for name in _dupes(t.name for t in model.tables):
        out.append(_err("duplicate-table", f"sdl/table/{name}", f"table name {name!r} declared more than once"))

    for table in model.tables:
        path = f"sdl/table/{table.name}"
        columns = {c.name for c in table.columns}
        for name in _dupes(c.name for c in table.columns):
            out.append(_err("duplicate-column", path, f"column {name!r} declared more than once"))
        if not table.primary_key:
            out.append(_err("missing-primary-key", path, "table declares no primary key"))
        for col in table.primary_key:
            if col not in columns:
                out.append(_err("unresolved-column", path, f"primary key column {col!r} does not exist"))
        for fk in table.foreign_keys:
            fk_path = f"{path}/fk[{fk}]"
            for col in fk.columns:
                if col not in columns:
                    out.append(_err("unresolved-column", fk_path, f"local column {col!r} does not exist"))
            target = model.table(fk.target_table)
            if target is None:
                out.append(_err("unresolved-table", fk_path, f"target table {fk.target_table!r} does not exist"))
                continue
            if len(fk.columns) != len(fk.target_columns):
                out.append(_err("fk-arity-mismatch", fk_path, "local and target column lists differ in length"))
            if tuple(fk.target_columns) != tuple(target.primary_key):
                out.append(
                    _err(
                        "fk-target-not-primary-key",
                        fk_path,
                        f"target columns ({','.join(fk.target_columns)}) are not the primary key of {target.name!r}",
                    )
                )
    return out


def _check_condition(cond: Condition, table, path: str) -> list[Diagnostic]:
    out = []
    column = table.column_map().get(cond.column)
    if column is None:
        out.append(_err("unknown-condition-column", path, f"condition column {cond.column!r} is not on table {table.name!r}"))
        return out
    if not cond.values:
        out.append(_err("empty-condition", path, "condition carries no values"))
    for value in cond.values:
        try:
            coerce_scalar(column.type, value)
        except ValueError:
            out.append(
                _err(
                    "condition-type-mismatch",
                    path,
                    f"value {value!r} is not a valid {column.type.value} for column {cond.column!r}",
                )
            )
    return out


def validate_mdl(cdl: CdlModel, sdl: SdlModel, mdl: MdlModel) -> list[Diagnostic]:
    """Cross-validate mapping fragments against clean CDL and SDL models."""
    out: list[Diagnostic] = []
    for i, frag in enumerate(mdl.fragments):
        label = frag.name or f"fragment[{i}]"
        path = f"mdl/{label}"
        table = sdl.table(frag.sdl_table)
        if table is None:
            out.append(_err("unknown-table", path, f"table {frag.sdl_table!r} is not declared in the SDL"))
        if frag.kind is FragmentKind.LEVEL:
            level = cdl.level(frag.cdl_entity)
            if level is None:
                out.append(_err("unknown-entity", path, f"level {frag.cdl_entity!r} is not declared in the CDL"))
                entity_props = None
            else:
                entity_props = {p.name for p in level.properties}
        else:
            fact = cdl.fact_relationship(frag.cdl_entity)
            if fact is None:
                out.append(_err("unknown-entity", path, f"fact relationship {frag.cdl_entity!r} is not declared in the CDL"))
                entity_props = None
            else:
                entity_props = {p.name for p in fact.measures} | {p.name for p in fact.properties}

        for name in _dupes(pm.property for pm in frag.property_mappings):
            out.append(_err("duplicate-property-mapping", path, f"property {name!r} mapped more than once"))
        for pm in frag.property_mappings:
            if entity_props is not None and pm.property not in entity_props:
                out.append(_err("unknown-property", path, f"{frag.cdl_entity!r} has no property {pm.property!r}"))
            if table is not None and pm.column not in table.column_map():
                out.append(_err("unknown-column", path, f"table {frag.sdl_table!r} has no column {pm.column!r}"))
        if table is not None:
            for cond in frag.conditions:
                out.extend(_check_condition(cond, table, path))
    return out
