"""View compilation and the instance-level checks."""

import dataclasses

from cim.compiler import (
    check_cardinalities,
    check_exclusivity,
    check_summarizability,
    compile_views,
    materialize_views,
    views_to_dict,
)
from cim.model import (
    Cardinality,
    CdlModel,
    Column,
    Condition,
    ConditionOperator,
    Datatype,
    Dimension,
    ForeignKey,
    FragmentKind,
    Hierarchy,
    Level,
    MappingFragment,
    MdlModel,
    ParentChildRel,
    Property,
    PropertyMapping,
    SdlModel,
    Table,
)
from cim.storage import Store, evaluate

from conftest import load_store, rows_multiset


def codes(diagnostics):
    return [d.code for d in diagnostics]


# --------------------------------------------------------------------------
# Compilation


def test_view_coverage_matches_model_elements(cdl, compiled):
    mapped_levels = {v.target.name for v in compiled.views if v.target.kind == "level"}
    assert mapped_levels == {l.name for l in cdl.levels}
    rel_pairs = {(r.child_level, r.parent_level) for r in cdl.all_relationships()}
    pc_views = {(v.target.child_level, v.target.parent_level) for v in compiled.views if v.target.kind == "parentChild"}
    assert pc_views == rel_pairs
    facts = [v for v in compiled.views if v.target.kind == "factRelationship"]
    assert [v.target.name for v in facts] == ["Attends"]
    assert len(compiled.views) == len(cdl.levels) + len(rel_pairs) + 1


def test_weekend_view_equals_select_oracle(compiled, store, olympic_rows):
    view = compiled.view("level:Weekend")
    result = evaluate(view.body, store)
    assert [name for name, _ in result.schema] == ["DayID", "FullDate", "DayOfWeek"]
    expected = sorted(
        (row[0], row[1], row[2]) for row in olympic_rows["Day"] if row[2] in ("Sat", "Sun")
    )
    assert sorted(result.rows) == expected


def test_weekend_view_soundness(compiled, store):
    # Every produced tuple satisfies the S2 condition.
    result = evaluate(compiled.view("level:Weekend").body, store)
    day_of_week = result.index_of("DayOfWeek")
    assert result.rows and all(row[day_of_week] in ("Sat", "Sun") for row in result.rows)


def test_weekday_weekend_partition_day_table(compiled, store):
    weekday = evaluate(compiled.view("level:Weekday").body, store)
    weekend = evaluate(compiled.view("level:Weekend").body, store)
    # Shared mapped columns: DayID, FullDate.
    both = [(r[weekday.index_of("DayID")], r[weekday.index_of("FullDate")]) for r in weekday.rows]
    both += [(r[weekend.index_of("DayID")], r[weekend.index_of("FullDate")]) for r in weekend.rows]
    day = store.relation("Day")
    expected = [(r[day.index_of("DayID")], r[day.index_of("FullDate")]) for r in day.rows]
    assert sorted(both) == sorted(expected)


def test_unmapped_weekday_description_is_null_column(compiled, store):
    weekday = evaluate(compiled.view("level:Weekday").body, store)
    description = weekday.index_of("Description")
    assert all(row[description] is None for row in weekday.rows)


def test_year_view_equals_nested_loop_join_oracle(compiled, store, olympic_rows):
    result = evaluate(compiled.view("level:Year").body, store)
    assert [name for name, _ in result.schema] == ["YearID", "YearLabel"]
    expected = []
    for period in olympic_rows["WeekMonth"]:
        for year in olympic_rows["Year"]:
            if period[3] == year[0]:
                expected.append((period[3], year[1]))
    assert sorted(map(repr, result.rows)) == sorted(map(repr, expected))
    assert len(result.rows) == 65  # one per WeekMonth row: bag semantics


def test_parent_child_view_shape(compiled, store):
    view = compiled.view("parentChild:Day->Weekend")
    result = evaluate(view.body, store)
    assert [name for name, _ in result.schema] == ["Day.DayID", "Weekend.DayID"]
    assert all(child == parent for child, parent in result.rows)
    assert len(result.rows) == 104  # the 2008 weekend days


def test_week_year_parent_child_is_functional(compiled, store):
    result = evaluate(compiled.view("parentChild:Week->Year").body, store)
    weeks = [row[0] for row in result.rows]
    assert len(weeks) == len(set(weeks)) == 53


def test_empty_mdl_reports_each_level_unmapped(cdl, sdl):
    result = compile_views(cdl, sdl, MdlModel())
    assert result.views == []
    unmapped = [d for d in result.diagnostics if d.code == "unmapped-level"]
    assert len(unmapped) == len(cdl.levels)
    assert any(d.code == "unmapped-fact-relationship" for d in result.diagnostics)


def test_unmapped_key_is_an_error(cdl, sdl, mdl):
    fragments = tuple(
        dataclasses.replace(f, property_mappings=(PropertyMapping("FullDate", "FullDate"),))
        if f.name == "S2"
        else f
        for f in mdl.fragments
    )
    result = compile_views(cdl, sdl, dataclasses.replace(mdl, fragments=fragments))
    assert "unmapped-key" in codes(result.diagnostics)
    assert result.view("level:Weekend") is None


def test_disjoint_fragments_without_fk_path_fail(cdl, sdl, mdl):
    # Remap Year's label fragment onto a table no foreign key reaches.
    orphan = Table("Orphan", (Column("OID", Datatype.INTEGER), Column("Label", Datatype.STRING)), ("OID",))
    bigger = dataclasses.replace(sdl, dimension_tables=sdl.dimension_tables + (orphan,))
    fragments = tuple(
        dataclasses.replace(f, sdl_table="Orphan", property_mappings=(PropertyMapping("YearLabel", "Label"),))
        if f.name == "S-YearLabel"
        else f
        for f in mdl.fragments
    )
    result = compile_views(cdl, bigger, dataclasses.replace(mdl, fragments=fragments))
    assert "no-join-path" in codes(result.diagnostics)
    assert result.view("level:Year") is None


def test_overlapping_but_different_property_sets_fail(cdl, sdl, mdl):
    extra = MappingFragment(
        FragmentKind.LEVEL,
        "Weekend",
        "Day",
        (PropertyMapping("DayID", "DayID"), PropertyMapping("DayOfWeek", "DayOfWeek")),
        name="S2b",
    )
    result = compile_views(cdl, sdl, dataclasses.replace(mdl, fragments=mdl.fragments + (extra,)))
    assert "inconsistent-fragments" in codes(result.diagnostics)


def test_multi_fragment_fact_relationship_is_rejected(cdl, sdl, mdl):
    extra = MappingFragment(
        FragmentKind.FACT_RELATIONSHIP, "Attends", "Attends", (PropertyMapping("TicketPrice", "TicketPrice"),)
    )
    result = compile_views(cdl, sdl, dataclasses.replace(mdl, fragments=mdl.fragments + (extra,)))
    assert "multi-fragment-fact-relationship" in codes(result.diagnostics)


def test_same_property_fragments_union(cdl, sdl, mdl, olympic_rows):
    # Two alternative populations of one level over the same table.
    weekend_alt = MappingFragment(
        FragmentKind.LEVEL,
        "Weekend",
        "Day",
        (PropertyMapping("DayID", "DayID"), PropertyMapping("FullDate", "FullDate"), PropertyMapping("DayOfWeek", "DayOfWeek")),
        (Condition("DayOfWeek", ConditionOperator.IN, ("Fri",)),),
        name="S2-fri",
    )
    fragments = mdl.fragments + (weekend_alt,)
    result = compile_views(cdl, sdl, dataclasses.replace(mdl, fragments=fragments))
    assert result.ok
    store = load_store(sdl, olympic_rows)
    rows = evaluate(result.view("level:Weekend").body, store).rows
    kinds = {row[2] for row in rows}
    assert kinds == {"Sat", "Sun", "Fri"}


def test_compilation_is_deterministic(cdl, sdl, mdl):
    first = views_to_dict(compile_views(cdl, sdl, mdl), sdl)
    second = views_to_dict(compile_views(cdl, sdl, mdl), sdl)
    assert first == second


def test_fact_view_resolves_roles_to_bottom_keys(compiled, store, olympic_rows):
    result = evaluate(compiled.view("factRelationship:Attends").body, store)
    names = [name for name, _ in result.schema]
    assert names == [
        "TicketPrice",
        "location.VenueID",
        "date.DayID",
        "event.EventID",
        "attendee.AttendeeID",
    ]
    expected = sorted((p, v, d, e, a) for v, d, e, a, p in olympic_rows["Attends"])
    assert sorted(result.rows) == expected


def test_materialized_views_are_snapshots(compiled, store):
    snapshots = materialize_views(compiled.views, store)
    assert set(snapshots) == {v.target.id for v in compiled.views}
    live = evaluate(compiled.view("level:Weekend").body, store)
    assert rows_multiset(snapshots["level:Weekend"]) == rows_multiset(live)


# --------------------------------------------------------------------------
# Exclusivity


def test_exclusivity_clean_on_fixture(cdl, compiled, store):
    assert check_exclusivity(cdl, compiled, store) == []


def test_overlapping_exclusive_conditions_are_detected(cdl, sdl, mdl, olympic_rows):
    # S1 widened to include Saturdays: they now populate both branches.
    fragments = tuple(
        dataclasses.replace(
            f, conditions=(Condition("DayOfWeek", ConditionOperator.IN, ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat")),)
        )
        if f.name == "S1"
        else f
        for f in mdl.fragments
    )
    overlapping = dataclasses.replace(mdl, fragments=fragments)
    result = compile_views(cdl, sdl, overlapping)
    assert result.ok
    store = load_store(sdl, olympic_rows)
    violations = check_exclusivity(cdl, result, store)
    day_kind = [v for v in violations if v.details["group"] == "DayKind"]
    assert len(day_kind) == 52  # the Saturdays of 2008
    witness = day_kind[0]
    assert sorted(witness.details["relationships"]) == ["Day->Weekday", "Day->Weekend"]


def test_exclusive_group_with_no_data_is_clean(cdl, sdl, mdl, olympic_rows):
    rows = dict(olympic_rows)
    rows["Day"] = []
    rows["Attends"] = []
    store = load_store(sdl, rows)
    result = compile_views(cdl, sdl, mdl)
    assert check_exclusivity(cdl, result, store) == []


# --------------------------------------------------------------------------
# Cardinalities


def test_cardinalities_clean_on_fixture(cdl, compiled, store):
    assert check_cardinalities(cdl, compiled, store) == []


def test_city_with_null_country_violates_min_one(cdl, sdl, mdl, olympic_rows):
    rows = dict(olympic_rows)
    rows["City"] = list(rows["City"]) + [(99, "Atlantis", None)]
    store = load_store(sdl, rows)
    result = compile_views(cdl, sdl, mdl)
    violations = check_cardinalities(cdl, result, store)
    missing_parent = [
        v
        for v in violations
        if v.details["relationship"] == "City->Country"
        and v.details["member"] == ["99"]
        and v.details["side"] == "parents"
    ]
    assert len(missing_parent) == 1
    assert missing_parent[0].details["count"] == 0
    assert missing_parent[0].details["bound"] == "(1,1)"


def test_country_without_cities_violates_child_min(cdl, sdl, mdl, olympic_rows):
    rows = dict(olympic_rows)
    rows["Country"] = list(rows["Country"]) + [(3, "Lilliput")]
    store = load_store(sdl, rows)
    result = compile_views(cdl, sdl, mdl)
    violations = check_cardinalities(cdl, result, store)
    childless = [
        v
        for v in violations
        if v.details["relationship"] == "City->Country"
        and v.details["member"] == ["3"]
        and v.details["side"] == "children"
    ]
    assert len(childless) == 1 and childless[0].details["count"] == 0


def test_parent_max_one_violation():
    cdl, sdl, mdl, rows = _bridge_instance()
    store = load_store(sdl, rows)
    result = compile_views(cdl, sdl, mdl)
    assert result.ok, result.diagnostics
    violations = check_cardinalities(cdl, result, store)
    too_many = [v for v in violations if v.details["side"] == "parents" and v.details["count"] == 2]
    assert too_many and too_many[0].details["member"] == ["1"]


# --------------------------------------------------------------------------
# Summarizability


def test_fixture_hierarchies_are_summarizable(cdl, compiled, store):
    report = check_summarizability(cdl, compiled, store)
    assert report.summarizable
    assert {(e.dimension, e.hierarchy) for e in report.entries} == {
        ("Location", "Location"),
        ("Date", "Date"),
        ("Event", "(implicit)"),
        ("Attendee", "(implicit)"),
    }


def _bridge_instance():
    """Two levels joined through a bridge table: child 1 has two parents."""
    levels = (
        Level("A", (Property("AID", Datatype.INTEGER),), ("AID",)),
        Level("B", (Property("BID", Datatype.INTEGER),), ("BID",)),
    )
    hierarchy = Hierarchy(
        "H", (ParentChildRel("A", "B", Cardinality.parse("(0,n)"), Cardinality.parse("(0,1)")),)
    )
    cdl = CdlModel("bridge", levels, (Dimension("D", "A", ("H",)), Dimension("E", "B")), (hierarchy,), ())
    ta = Table("TA", (Column("AID", Datatype.INTEGER),), ("AID",))
    tb = Table("TB", (Column("BID", Datatype.INTEGER),), ("BID",))
    bridge = Table(
        "Bridge",
        (Column("AID", Datatype.INTEGER), Column("BID", Datatype.INTEGER)),
        ("AID", "BID"),
        (ForeignKey(("AID",), "TA", ("AID",)), ForeignKey(("BID",), "TB", ("BID",))),
    )
    sdl = SdlModel("bridgeDW", dimension_tables=(ta, tb, bridge))
    mdl = MdlModel(
        (
            MappingFragment(FragmentKind.LEVEL, "A", "TA", (PropertyMapping("AID", "AID"),)),
            MappingFragment(FragmentKind.LEVEL, "B", "TB", (PropertyMapping("BID", "BID"),)),
        )
    )
    rows = {
        "TA": [(1,), (2,)],
        "TB": [(10,), (20,)],
        "Bridge": [(1, 10), (1, 20), (2, 10)],
    }
    return cdl, sdl, mdl, rows


def test_double_parent_is_non_strict_with_witness():
    cdl, sdl, mdl, rows = _bridge_instance()
    store = load_store(sdl, rows)
    result = compile_views(cdl, sdl, mdl)
    report = check_summarizability(cdl, result, store)
    assert not report.summarizable
    entry = next(e for e in report.entries if e.dimension == "D")
    assert len(entry.non_strict) == 1
    witness = entry.non_strict[0]
    assert witness.details["childKey"] == ["1"]
    assert sorted(witness.details["parentKeys"]) == [["10"], ["20"]]


def test_zero_parent_under_mandatory_path_is_non_covering(cdl, sdl, mdl, olympic_rows):
    rows = dict(olympic_rows)
    rows["City"] = list(rows["City"]) + [(99, "Atlantis", None)]
    store = load_store(sdl, rows)
    result = compile_views(cdl, sdl, mdl)
    report = check_summarizability(cdl, result, store)
    entry = next(e for e in report.entries if e.dimension == "Location")
    assert not entry.summarizable
    assert any(v.details["childKey"] == ["99"] for v in entry.non_covering)


def test_empty_hierarchy_data_is_vacuously_summarizable(cdl, sdl, mdl, olympic_rows):
    rows = dict(olympic_rows)
    rows["Day"] = []
    rows["Attends"] = []
    store = load_store(sdl, rows)
    result = compile_views(cdl, sdl, mdl)
    report = check_summarizability(cdl, result, store)
    entry = next(e for e in report.entries if e.dimension == "Date")
    assert entry.summarizable


def test_aggregation_consistency_through_summarizable_hierarchy(cdl, compiled, store):
    """Aggregating facts at the parent level equals aggregating at the
    child level and rolling the partial sums up through the parent-child
    view; this holds because the Location hierarchy checks summarizable."""
    from collections import defaultdict

    from cim.query import execute, parse_cql

    report = check_summarizability(cdl, compiled, store)
    assert next(e for e in report.entries if e.dimension == "Location").summarizable

    by_country = execute(
        parse_cql("AGGREGATE sum(TicketPrice) FROM Attends ROLLUP Location TO Country", cdl),
        cdl, compiled, store,
    )
    by_city = execute(
        parse_cql("AGGREGATE sum(TicketPrice) FROM Attends ROLLUP Location TO City", cdl),
        cdl, compiled, store,
    )
    pairs = evaluate(compiled.view("parentChild:City->Country").body, store)
    parent_of = {child: parent for child, parent in pairs.rows}

    rolled = defaultdict(int)
    city_key = by_city.index_of("City.CityID")
    for row in by_city.rows:
        if row[-1] is not None:
            rolled[parent_of[row[city_key]]] += row[-1]
    country_key = by_country.index_of("Country.CountryID")
    direct = {row[country_key]: row[-1] for row in by_country.rows if row[-1] is not None}
    assert direct == dict(rolled)


def test_parallel_foreign_keys_make_the_join_path_ambiguous():
    # Two FKs between the same pair of tables: the level spans both, and
    # neither path may be chosen silently.
    integer = Datatype.INTEGER
    t2 = Table("T2", (Column("K", integer), Column("Label", Datatype.STRING)), ("K",))
    t1 = Table(
        "T1",
        (Column("K", integer), Column("A", integer), Column("B", integer)),
        ("K",),
        (ForeignKey(("A",), "T2", ("K",)), ForeignKey(("B",), "T2", ("K",))),
    )
    level = Level("L", (Property("LK", integer), Property("Label", Datatype.STRING)), ("LK",))
    cdl = CdlModel("amb", (level,), (Dimension("D", "L"), Dimension("E", "L")), (), ())
    sdl = SdlModel("ambDW", dimension_tables=(t1, t2))
    mdl = MdlModel(
        (
            MappingFragment(FragmentKind.LEVEL, "L", "T1", (PropertyMapping("LK", "K"),)),
            MappingFragment(FragmentKind.LEVEL, "L", "T2", (PropertyMapping("Label", "Label"),)),
        )
    )
    result = compile_views(cdl, sdl, mdl)
    assert "ambiguous-join-path" in codes(result.diagnostics)
    assert result.view("level:L") is None


def test_children_per_parent_max_violation():
    cdl, sdl, mdl, rows = _bridge_instance()
    # Tighten the declared child cardinality to at most one child.
    tight = dataclasses.replace(
        cdl,
        hierarchies=(
            Hierarchy(
                "H",
                (ParentChildRel("A", "B", Cardinality.parse("(0,1)"), Cardinality.parse("(0,1)")),),
            ),
        ),
    )
    store = load_store(sdl, rows)
    result = compile_views(tight, sdl, mdl)
    violations = check_cardinalities(tight, result, store)
    crowded = [v for v in violations if v.details["side"] == "children" and v.details["count"] == 2]
    assert crowded and crowded[0].details["member"] == ["10"]
