"""Aggregation queries over the conceptual model.

A query names a fact relationship, optional per-dimension roll-up
targets, selection conditions on mentioned levels, and one aggregation.
It is answered by rewriting over the compiled views: the fact view is
joined through parent-child view chains up to each roll-up target,
conditions become selects at the level where they are stated, and the
result is grouped by the key (plus ``Name``) properties of every
mentioned level.  Dimensions the query does not mention are aggregated
out.

Where a roll-up crosses mutually exclusive alternatives, all branches
reaching the target are taken and unioned; exclusivity guarantees each
child member follows exactly one of them, so the union is a partition.
Diverging relations that are NOT exclusive alternatives make the
roll-up ambiguous and are refused.
"""

from __future__ import annotations

import decimal
import difflib
import re
from dataclasses import dataclass, replace

from .compiler import ViewDefinition
from .model import CdlModel, Datatype, Dimension, ParentChildRel, Scalar, coerce_scalar
from .storage import (
    Aggregate,
    AggregateFunction,
    Aggregation,
    Comparison,
    ComparisonOp,
    Join,
    Plan,
    Project,
    ProjectItem,
    Relation,
    Rename,
    Select,
    Store,
    Union,
    evaluate,
)

NAME_PROPERTY = "Name"  # the "name-like" property included next to keys


class QueryError(Exception):
    pass


class CqlSyntaxError(QueryError):
    def __init__(self, message: str, position: int):
        self.position = position
        super().__init__(f"{message} (at position {position})")


class QueryNameError(QueryError):
    """An identifier does not resolve; carries close-match candidates."""

    def __init__(self, message: str, candidates: list[str]):
        self.candidates = candidates
        if candidates:
            message = f"{message}; did you mean: {', '.join(candidates)}?"
        super().__init__(message)


@dataclass(frozen=True)
class QueryCondition:
    level: str
    property: str
    operator: ComparisonOp
    values: tuple[Scalar, ...]


@dataclass(frozen=True)
class CqlQuery:
    fact_relationship: str
    rollups: tuple[tuple[str, str], ...] = ()  # (dimension, target level)
    conditions: tuple[QueryCondition, ...] = ()
    function: AggregateFunction = AggregateFunction.COUNT
    measure: str | None = None
    name: str | None = None

    def rollup_for(self, dimension: str) -> str | None:
        return next((target for dim, target in self.rollups if dim == dimension), None)


# ---------------------------------------------------------------------------
# Textual syntax


_TOKEN_RE = re.compile(
    r"""\s*(?:
        (?P<string>"(?:[^"\\]|\\.)*")
      | (?P<number>-?\d+(?:\.\d+)?)
      | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
      | (?P<punct>[().,=<>])
    )""",
    re.VERBOSE,
)

_KEYWORDS = {"AGGREGATE", "FROM", "ROLLUP", "TO", "WHERE", "AND", "IN", "TRUE", "FALSE"}


@dataclass
class _Token:
    kind: str
    text: str
    position: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise CqlSyntaxError(f"unexpected character {stripped[0]!r}", len(text) - len(stripped) + 1)
        pos = match.end()
        for kind in ("string", "number", "ident", "punct"):
            value = match.group(kind)
            if value is not None:
                tokens.append(_Token(kind, value, match.start(kind) + 1))
                break
    tokens.append(_Token("eof", "", len(text) + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.at = 0

    def peek(self) -> _Token:
        return self.tokens[self.at]

    def next(self) -> _Token:
        token = self.tokens[self.at]
        self.at += 1
        return token

    def keyword(self, word: str) -> None:
        token = self.next()
        if token.kind != "ident" or token.text.upper() != word:
            raise CqlSyntaxError(f"expected {word}, found {token.text or 'end of input'!r}", token.position)

    def at_keyword(self, word: str) -> bool:
        token = self.peek()
        return token.kind == "ident" and token.text.upper() == word

    def ident(self, what: str) -> str:
        token = self.next()
        if token.kind != "ident" or token.text.upper() in _KEYWORDS:
            raise CqlSyntaxError(f"expected {what}, found {token.text or 'end of input'!r}", token.position)
        return token.text

    def punct(self, char: str) -> None:
        token = self.next()
        if token.kind != "punct" or token.text != char:
            raise CqlSyntaxError(f"expected {char!r}, found {token.text or 'end of input'!r}", token.position)

    def literal(self) -> Scalar:
        token = self.next()
        if token.kind == "string":
            return token.text[1:-1].replace('\\"', '"').replace("\\\\", "\\")
        if token.kind == "number":
            if "." in token.text:
                return decimal.Decimal(token.text)
            return int(token.text)
        if token.kind == "ident" and token.text.upper() in ("TRUE", "FALSE"):
            return token.text.upper() == "TRUE"
        raise CqlSyntaxError(f"expected a literal, found {token.text or 'end of input'!r}", token.position)


def parse_cql(text: str, cdl: CdlModel | None = None) -> CqlQuery:
    """Parse the textual query form; resolves names when a model is given.

    Grammar (keywords case-insensitive)::

        AGGREGATE fn '(' [measure] ')' FROM factRel
            { ROLLUP dimension TO level }
            [ WHERE level '.' property (= | IN | < | >) literal-or-list { AND ... } ]
    """
    p = _Parser(text)
    p.keyword("AGGREGATE")
    fn_token = p.peek()
    fn_name = p.ident("an aggregation function").lower()
    try:
        function = AggregateFunction(fn_name)
    except ValueError:
        raise CqlSyntaxError(f"unknown aggregation function {fn_name!r}", fn_token.position) from None
    p.punct("(")
    measure = None
    if not (p.peek().kind == "punct" and p.peek().text == ")"):
        measure = p.ident("a measure name")
    p.punct(")")
    p.keyword("FROM")
    fact = p.ident("a fact relationship name")

    rollups: list[tuple[str, str]] = []
    while p.at_keyword("ROLLUP"):
        p.next()
        dimension = p.ident("a dimension name")
        p.keyword("TO")
        level = p.ident("a level name")
        rollups.append((dimension, level))

    conditions: list[QueryCondition] = []
    if p.at_keyword("WHERE"):
        p.next()
        while True:
            level = p.ident("a level name")
            p.punct(".")
            prop = p.ident("a property name")
            op_token = p.next()
            if op_token.kind == "punct" and op_token.text in ("=", "<", ">"):
                operator = {
                    "=": ComparisonOp.EQUALS,
                    "<": ComparisonOp.LESS_THAN,
                    ">": ComparisonOp.GREATER_THAN,
                }[op_token.text]
                values: tuple[Scalar, ...] = (p.literal(),)
            elif op_token.kind == "ident" and op_token.text.upper() == "IN":
                operator = ComparisonOp.IN
                p.punct("(")
                collected = [p.literal()]
                while p.peek().kind == "punct" and p.peek().text == ",":
                    p.next()
                    collected.append(p.literal())
                p.punct(")")
                values = tuple(collected)
            else:
                raise CqlSyntaxError(
                    f"expected an operator (=, IN, <, >), found {op_token.text or 'end of input'!r}",
                    op_token.position,
                )
            conditions.append(QueryCondition(level=level, property=prop, operator=operator, values=values))
            if p.at_keyword("AND"):
                p.next()
                continue
            break

    trailing = p.peek()
    if trailing.kind != "eof":
        raise CqlSyntaxError(f"unexpected trailing input {trailing.text!r}", trailing.position)

    query = CqlQuery(
        fact_relationship=fact,
        rollups=tuple(rollups),
        conditions=tuple(conditions),
        function=function,
        measure=measure,
    )
    if cdl is not None:
        query = resolve_query(query, cdl)
    return query


# ---------------------------------------------------------------------------
# JSON encoding (used by the HTTP service and the UI)


def query_to_dict(query: CqlQuery) -> dict:
    body: dict = {"factRelationship": query.fact_relationship}
    if query.name:
        body["name"] = query.name
    body["rollups"] = {dim: level for dim, level in query.rollups}
    body["conditions"] = [
        {
            "level": c.level,
            "property": c.property,
            "operator": c.operator.value,
            "values": [_scalar_to_json(v) for v in c.values],
        }
        for c in query.conditions
    ]
    aggregation: dict = {"function": query.function.value}
    if query.measure is not None:
        aggregation["measure"] = query.measure
    body["aggregation"] = aggregation
    return body


def _scalar_to_json(value: Scalar):
    if isinstance(value, decimal.Decimal):
        return str(value)
    if hasattr(value, "isoformat"):
        return value.isoformat()
    return value


def _scalar_from_json(value) -> Scalar:
    # Decimal and date literals travel as strings; they are coerced
    # against the property's datatype during resolution.
    if isinstance(value, float):
        return decimal.Decimal(str(value))
    return value


def query_from_dict(body: dict) -> CqlQuery:
    """Build a query from its JSON object form; raises QueryError on shape problems."""
    if not isinstance(body, dict):
        raise QueryError("query body must be a JSON object")
    if "factRelationship" not in body or not isinstance(body["factRelationship"], str):
        raise QueryError("query body needs a string 'factRelationship'")
    aggregation = body.get("aggregation")
    if not isinstance(aggregation, dict) or "function" not in aggregation:
        raise QueryError("query body needs an 'aggregation' object with a 'function'")
    try:
        function = AggregateFunction(aggregation["function"])
    except ValueError:
        raise QueryError(f"unknown aggregation function {aggregation['function']!r}") from None
    measure = aggregation.get("measure")
    if measure is not None and not isinstance(measure, str):
        raise QueryError("'aggregation.measure' must be a string")

    rollups = body.get("rollups", {})
    if not isinstance(rollups, dict) or not all(isinstance(v, str) for v in rollups.values()):
        raise QueryError("'rollups' must map dimension names to level names")

    conditions = []
    raw_conditions = body.get("conditions", [])
    if not isinstance(raw_conditions, list):
        raise QueryError("'conditions' must be a list")
    for i, raw in enumerate(raw_conditions):
        if not isinstance(raw, dict):
            raise QueryError(f"condition [{i}] must be an object")
        try:
            operator = ComparisonOp(raw.get("operator"))
        except ValueError:
            raise QueryError(f"condition [{i}]: unknown operator {raw.get('operator')!r}") from None
        values = raw.get("values")
        if not isinstance(values, list) or not values:
            raise QueryError(f"condition [{i}]: 'values' must be a non-empty list")
        if not isinstance(raw.get("level"), str) or not isinstance(raw.get("property"), str):
            raise QueryError(f"condition [{i}]: needs string 'level' and 'property'")
        conditions.append(
            QueryCondition(
                level=raw["level"],
                property=raw["property"],
                operator=operator,
                values=tuple(_scalar_from_json(v) for v in values),
            )
        )
    name = body.get("name")
    return CqlQuery(
        fact_relationship=body["factRelationship"],
        rollups=tuple(rollups.items()),
        conditions=tuple(conditions),
        function=function,
        measure=measure,
        name=name if isinstance(name, str) else None,
    )


# ---------------------------------------------------------------------------
# Name resolution


def _candidates(name: str, known) -> list[str]:
    known = list(known)
    close = difflib.get_close_matches(name, known, n=3, cutoff=0.4)
    return close if close else sorted(known)[:5]


def _coerce_literal(dtype: Datatype, value: Scalar, context: str) -> Scalar:
    if isinstance(value, str):
        try:
            return coerce_scalar(dtype, value)
        except ValueError as exc:
            raise QueryError(f"{context}: {exc}") from None
    if isinstance(value, bool):
        if dtype is Datatype.BOOLEAN:
            return value
    elif isinstance(value, int):
        if dtype is Datatype.INTEGER:
            return value
        if dtype is Datatype.DECIMAL:
            return decimal.Decimal(value)
    elif isinstance(value, decimal.Decimal):
        if dtype is Datatype.DECIMAL:
            return value
    raise QueryError(f"{context}: literal {value!r} does not fit datatype {dtype.value}")


def reachable_levels(cdl: CdlModel, dimension: Dimension) -> list[str]:
    """Bottom level plus everything reachable child-to-parent from it."""
    rels = cdl.dimension_relationships(dimension)
    by_child: dict[str, list[ParentChildRel]] = {}
    for rel in rels:
        by_child.setdefault(rel.child_level, []).append(rel)
    seen = [dimension.bottom_level]
    frontier = [dimension.bottom_level]
    while frontier:
        level = frontier.pop()
        for rel in by_child.get(level, ()):
            if rel.parent_level not in seen:
                seen.append(rel.parent_level)
                frontier.append(rel.parent_level)
    return seen


def resolve_query(query: CqlQuery, cdl: CdlModel) -> CqlQuery:
    """Check every name in the query and coerce condition literals.

    Returns the normalized query; raises QueryNameError (with ranked
    candidates) for unknown names and QueryError for structural
    problems such as ambiguous roles or unreachable targets.
    """
    fact = cdl.fact_relationship(query.fact_relationship)
    if fact is None:
        raise QueryNameError(
            f"unknown fact relationship {query.fact_relationship!r}",
            _candidates(query.fact_relationship, (f.name for f in cdl.fact_relationships)),
        )

    role_dims = [role.dimension for role in fact.roles]
    condition_levels = {cdl.dimension(d).bottom_level for d in role_dims if cdl.dimension(d)}
    for dim_name, target in query.rollups:
        if dim_name not in role_dims:
            raise QueryNameError(
                f"dimension {dim_name!r} is not a role of {fact.name!r}", _candidates(dim_name, role_dims)
            )
        if role_dims.count(dim_name) > 1:
            raise QueryError(f"dimension {dim_name!r} appears in several roles; roll-up is ambiguous")
        dimension = cdl.dimension(dim_name)
        reachable = reachable_levels(cdl, dimension)
        if target not in reachable:
            raise QueryNameError(
                f"level {target!r} is not reachable from {dimension.bottom_level!r} in dimension {dim_name!r}",
                _candidates(target, reachable),
            )
        condition_levels.add(target)
    if len({dim for dim, _ in query.rollups}) != len(query.rollups):
        raise QueryError("a dimension may be rolled up at most once")

    conditions = []
    for cond in query.conditions:
        if cond.level not in condition_levels:
            raise QueryNameError(
                f"level {cond.level!r} is neither a bottom level of a role nor a roll-up target",
                _candidates(cond.level, condition_levels),
            )
        level = cdl.level(cond.level)
        prop = level.property_map().get(cond.property)
        if prop is None:
            raise QueryNameError(
                f"level {cond.level!r} has no property {cond.property!r}",
                _candidates(cond.property, level.property_map()),
            )
        context = f"condition on {cond.level}.{cond.property}"
        coerced = tuple(_coerce_literal(prop.type, v, context) for v in cond.values)
        if cond.operator in (ComparisonOp.LESS_THAN, ComparisonOp.GREATER_THAN) and len(coerced) != 1:
            raise QueryError(f"{context}: ordered comparison takes exactly one literal")
        conditions.append(replace(cond, values=coerced))

    measure = query.measure
    if query.function is AggregateFunction.COUNT:
        if measure is not None and measure not in fact.measure_map():
            raise QueryNameError(
                f"{fact.name!r} has no measure {measure!r}", _candidates(measure, fact.measure_map())
            )
    else:
        if measure is None:
            raise QueryError(f"{query.function.value} needs a measure")
        m = fact.measure_map().get(measure)
        if m is None:
            raise QueryNameError(
                f"{fact.name!r} has no measure {measure!r}", _candidates(measure, fact.measure_map())
            )
        if query.function in (AggregateFunction.SUM, AggregateFunction.AVG) and m.type not in (
            Datatype.INTEGER,
            Datatype.DECIMAL,
        ):
            raise QueryError(f"{query.function.value} needs a numeric measure; {measure!r} is {m.type.value}")

    return replace(query, conditions=tuple(conditions))


# ---------------------------------------------------------------------------
# Roll-up paths


def rollup_paths(cdl: CdlModel, dimension: Dimension, target: str) -> list[list[ParentChildRel]]:
    """Every simple child-to-parent path from the bottom level to `target`."""
    rels = cdl.dimension_relationships(dimension)
    by_child: dict[str, list[ParentChildRel]] = {}
    for rel in rels:
        by_child.setdefault(rel.child_level, []).append(rel)
    paths: list[list[ParentChildRel]] = []

    def walk(level: str, acc: list[ParentChildRel], visited: frozenset[str]):
        if level == target:
            paths.append(list(acc))
            return
        for rel in by_child.get(level, ()):
            if rel.parent_level in visited:
                continue
            acc.append(rel)
            walk(rel.parent_level, acc, visited | {rel.parent_level})
            acc.pop()

    walk(dimension.bottom_level, [], frozenset([dimension.bottom_level]))
    return paths


def _check_paths_mergeable(paths: list[list[ParentChildRel]], dimension: str, target: str) -> None:
    by_child: dict[str, list[ParentChildRel]] = {}
    for path in paths:
        for rel in path:
            group = by_child.setdefault(rel.child_level, [])
            if rel not in group:
                group.append(rel)
    for child, rels in sorted(by_child.items()):
        if len(rels) == 1:
            continue
        groups = {rel.exclusive_group for rel in rels}
        if None in groups or len(groups) != 1:
            raise QueryError(
                f"roll-up {dimension!r} to {target!r} is ambiguous: level {child!r} splits into "
                f"{len(rels)} relationships that are not one exclusive group"
            )


# ---------------------------------------------------------------------------
# Rewriting


def _view_map(views) -> dict[str, ViewDefinition]:
    if hasattr(views, "views"):
        views = views.views
    return {view.target.id: view for view in views}


def _rename_all(plan: Plan, names: list[str], mapper) -> Plan:
    return Rename(plan, tuple((name, mapper(name)) for name in names))


def _chain_plan(path: list[ParentChildRel], views: dict[str, ViewDefinition], cdl: CdlModel, tag: str) -> Plan:
    """Joins the parent-child views along one path into a
    (bottom key, target key) mapping with tag-scoped column names."""
    first = path[0]
    plan = views[f"parentChild:{first.child_level}->{first.parent_level}"].body
    bottom = cdl.level(first.child_level)
    current = cdl.level(first.parent_level)
    bottom_cols = [f"{first.child_level}.{k}" for k in bottom.key]
    current_cols = [f"{first.parent_level}.{k}" for k in current.key]
    for rel in path[1:]:
        step_view = views[f"parentChild:{rel.child_level}->{rel.parent_level}"].body
        child = cdl.level(rel.child_level)
        parent = cdl.level(rel.parent_level)
        step_cols = [f"{rel.child_level}.{k}" for k in child.key] + [f"{rel.parent_level}.{k}" for k in parent.key]
        right = _rename_all(step_view, step_cols, lambda c: f"s~{c}")
        pairs = tuple((f"{rel.child_level}.{k}", f"s~{rel.child_level}.{k}") for k in child.key)
        joined = Join(plan, right, pairs)
        items = [ProjectItem(name=c, source=c) for c in bottom_cols]
        items += [
            ProjectItem(name=f"{rel.parent_level}.{k}", source=f"s~{rel.parent_level}.{k}") for k in parent.key
        ]
        plan = Project(joined, tuple(items))
        current = parent
        current_cols = [f"{rel.parent_level}.{k}" for k in parent.key]
    items = [ProjectItem(name=f"{tag}b.{k}", source=c) for k, c in zip(bottom.key, bottom_cols)]
    items += [ProjectItem(name=f"{tag}t.{k}", source=c) for k, c in zip(current.key, current_cols)]
    return Project(plan, tuple(items))


def _require_chain_views(paths, views, dimension: str, target: str) -> None:
    for path in paths:
        for rel in path:
            key = f"parentChild:{rel.child_level}->{rel.parent_level}"
            if key not in views:
                raise QueryError(
                    f"unmapped level on roll-up path of {dimension!r} to {target!r}: "
                    f"no view for {rel.child_level}->{rel.parent_level}"
                )


def rewrite(query: CqlQuery, views, cdl: CdlModel, keep_unmentioned_grain: bool = False) -> Plan:
    """Turn a resolved query into a plan over the compiled views.

    With `keep_unmentioned_grain` the roles the query does not mention
    stay in the group-by at their bottom-level grain instead of being
    aggregated out.
    """
    query = resolve_query(query, cdl)
    lookup = _view_map(views)
    fact = cdl.fact_relationship(query.fact_relationship)
    fact_view = lookup.get(f"factRelationship:{fact.name}")
    if fact_view is None:
        raise QueryError(f"no compiled view for fact relationship {fact.name!r}")

    plan: Plan = fact_view.body
    # mentioned level -> current key column names inside the plan
    mentioned: dict[str, list[str]] = {}
    order: list[str] = []

    def mention(level_name: str, cols: list[str]):
        if level_name in mentioned:
            if mentioned[level_name] != cols:
                raise QueryError(f"level {level_name!r} is mentioned through conflicting routes")
            return
        mentioned[level_name] = cols
        order.append(level_name)

    roles_by_dim = {role.dimension: role for role in fact.roles}
    rolled_dims = set()
    for dim_name, target in query.rollups:
        rolled_dims.add(dim_name)
        role = roles_by_dim[dim_name]
        dimension = cdl.dimension(dim_name)
        bottom = cdl.level(dimension.bottom_level)
        if target == bottom.name:
            mention(bottom.name, [f"{role.name}.{k}" for k in bottom.key])
            continue
        paths = rollup_paths(cdl, dimension, target)
        _check_paths_mergeable(paths, dim_name, target)
        _require_chain_views(paths, lookup, dim_name, target)
        tag = f"r~{dim_name}."
        chains = [_chain_plan(path, lookup, cdl, tag) for path in paths]
        chain = chains[0] if len(chains) == 1 else Union(tuple(chains))
        pairs = tuple((f"{role.name}.{k}", f"{tag}b.{k}") for k in bottom.key)
        plan = Join(plan, chain, pairs)
        target_level = cdl.level(target)
        mention(target, [f"{tag}t.{k}" for k in target_level.key])

    for cond in query.conditions:
        if cond.level not in mentioned:
            # A condition at the bottom level of an un-rolled role.
            role = next(
                (r for r in fact.roles if cdl.dimension(r.dimension).bottom_level == cond.level), None
            )
            if role is None:
                raise QueryError(f"cannot anchor condition level {cond.level!r} to the fact relationship")
            bottom = cdl.level(cond.level)
            mention(cond.level, [f"{role.name}.{k}" for k in bottom.key])

    condition_levels = {c.level for c in query.conditions}
    joined: dict[str, str] = {}  # level -> column prefix in the plan
    for level_name in order:
        level = cdl.level(level_name)
        has_name = NAME_PROPERTY in level.property_map()
        if level_name not in condition_levels and not has_name:
            continue
        view = lookup.get(f"level:{level_name}")
        if view is None:
            raise QueryError(f"no compiled view for level {level_name!r}")
        # Deduplicate to one row per member before joining: level views
        # are bags and may carry a member more than once.
        needed = list(level.key)
        if has_name:
            needed.append(NAME_PROPERTY)
        for cond in query.conditions:
            if cond.level == level_name and cond.property not in needed:
                needed.append(cond.property)
        members = Aggregate(
            Project(view.body, tuple(ProjectItem(name=p, source=p) for p in needed)),
            tuple(needed),
            (),
        )
        prefix = f"lv~{level_name}."
        side = _rename_all(members, needed, lambda c: f"{prefix}{c}")
        pairs = tuple((col, f"{prefix}{k}") for col, k in zip(mentioned[level_name], level.key))
        plan = Join(plan, side, pairs)
        joined[level_name] = prefix

    for cond in query.conditions:
        prefix = joined[cond.level]
        plan = Select(plan, Comparison(column=f"{prefix}{cond.property}", op=cond.operator, values=cond.values))

    # Final shape: qualified output names for every mentioned level's
    # key (and Name) properties, then the aggregate.
    group_items: list[ProjectItem] = []
    for level_name in order:
        level = cdl.level(level_name)
        prefix = joined.get(level_name)
        for k, col in zip(level.key, mentioned[level_name]):
            source = f"{prefix}{k}" if prefix else col
            group_items.append(ProjectItem(name=f"{level_name}.{k}", source=source))
        if prefix and NAME_PROPERTY in level.property_map():
            group_items.append(ProjectItem(name=f"{level_name}.{NAME_PROPERTY}", source=f"{prefix}{NAME_PROPERTY}"))

    if keep_unmentioned_grain:
        for role in fact.roles:
            if role.dimension in rolled_dims:
                continue
            bottom = cdl.level(cdl.dimension(role.dimension).bottom_level)
            if bottom.name in mentioned:
                continue
            for k in bottom.key:
                group_items.append(ProjectItem(name=f"{role.name}.{k}", source=f"{role.name}.{k}"))

    measure_item: list[ProjectItem] = []
    if query.measure is not None and query.function is not AggregateFunction.COUNT:
        measure_item = [ProjectItem(name=query.measure, source=query.measure)]
    shaped = Project(plan, tuple(group_items + measure_item))

    output = "count" if query.function is AggregateFunction.COUNT else f"{query.function.value}({query.measure})"
    aggregation = Aggregation(
        function=query.function,
        measure=query.measure if query.function is not AggregateFunction.COUNT else None,
        output=output,
    )
    return Aggregate(shaped, tuple(item.name for item in group_items), (aggregation,))


def execute(query: CqlQuery, cdl: CdlModel, views, store: Store, keep_unmentioned_grain: bool = False) -> Relation:
    """Resolve, rewrite, and evaluate the query against the frozen store."""
    plan = rewrite(query, views, cdl, keep_unmentioned_grain=keep_unmentioned_grain)
    return evaluate(plan, store)
