"""The embedded store: loading, keys, evaluation, derived metadata."""

import datetime
import decimal
from concurrent.futures import ThreadPoolExecutor

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cim.fixtures import olympic_sdl, table_csv
from cim.model import Column, Datatype, ForeignKey, Table
from cim.storage import (
    Aggregate,
    Aggregation,
    AggregateFunction,
    And,
    Comparison,
    ComparisonOp,
    Join,
    LoadError,
    PlanError,
    Project,
    ProjectItem,
    Scan,
    Select,
    StorageError,
    Store,
    Union,
    evaluate,
)

from conftest import load_store, rows_multiset


def test_day_load_count_equals_csv_line_count(sdl, olympic_rows, store):
    csv_text = table_csv(sdl.table("Day"), olympic_rows["Day"]).decode("utf-8")
    line_count = len([line for line in csv_text.splitlines() if line.strip()]) - 1  # header
    assert line_count == 366
    assert len(store.relation("Day").rows) == line_count


def test_duplicate_primary_key_reports_key():
    table = Table("T", (Column("A", Datatype.INTEGER), Column("B", Datatype.STRING)), ("A",))
    store = Store()
    with pytest.raises(LoadError) as err:
        store.load_table(table, "A,B\n1,x\n1,y\n")
    assert "duplicate primary key" in str(err.value)
    assert "1" in str(err.value)
    assert err.value.line == 3


def test_empty_csv_with_header_loads_zero_rows():
    table = Table("T", (Column("A", Datatype.INTEGER),), ("A",))
    assert Store().load_table(table, "A\n") == 0


def test_header_mismatch_is_rejected():
    table = Table("T", (Column("A", Datatype.INTEGER),), ("A",))
    with pytest.raises(LoadError):
        Store().load_table(table, "Z\n1\n")


def test_header_order_is_free():
    table = Table("T", (Column("A", Datatype.INTEGER), Column("B", Datatype.STRING)), ("A",))
    store = Store()
    store.load_table(table, "B,A\nx,1\n")
    assert store.relation("T").rows == [(1, "x")]


def test_type_mismatch_reports_line_and_column():
    table = Table("T", (Column("A", Datatype.INTEGER),), ("A",))
    with pytest.raises(LoadError) as err:
        Store().load_table(table, "A\n1\nnope\n")
    assert err.value.line == 3
    assert "'A'" in str(err.value)


def test_empty_cell_becomes_null_and_nullable_types():
    table = Table(
        "T",
        (
            Column("A", Datatype.INTEGER),
            Column("D", Datatype.DATE),
            Column("X", Datatype.DECIMAL),
            Column("F", Datatype.BOOLEAN),
        ),
        ("A",),
    )
    store = Store()
    store.load_table(table, "A,D,X,F\n1,2008-02-09,12.50,true\n2,,,\n")
    assert store.relation("T").rows[0] == (1, datetime.date(2008, 2, 9), decimal.Decimal("12.50"), True)
    assert store.relation("T").rows[1] == (2, None, None, None)


def test_load_after_freeze_fails(sdl, olympic_rows):
    store = load_store(sdl, olympic_rows)
    with pytest.raises(StorageError):
        store.load_table(sdl.table("Day"), b"DayID,FullDate,DayOfWeek,WeekMonthID\n")


# --------------------------------------------------------------------------
# Foreign keys


def test_olympic_fixture_has_no_fk_violations(store, olympic_rows, sdl):
    # Independent nested-loop oracle over the raw rows.
    for table in sdl.tables:
        for fk in table.foreign_keys:
            target_rows = olympic_rows[fk.target_table]
            target = sdl.table(fk.target_table)
            pk_idx = [list(c.name for c in target.columns).index(c) for c in fk.target_columns]
            known = {tuple(r[i] for i in pk_idx) for r in target_rows}
            local_idx = [list(c.name for c in table.columns).index(c) for c in fk.columns]
            for row in olympic_rows[table.name]:
                value = tuple(row[i] for i in local_idx)
                assert value in known, (table.name, fk, value)
    assert store.check_foreign_keys() == []


def test_dangling_fk_is_reported_once_per_value(sdl, olympic_rows):
    rows = dict(olympic_rows)
    rows["Day"] = list(rows["Day"]) + [
        (900, datetime.date(2009, 1, 1), "Thu", 999),
        (901, datetime.date(2009, 1, 2), "Fri", 999),
    ]
    store = load_store(sdl, rows)
    violations = [v for v in store.check_foreign_keys() if v.subject == "Day"]
    assert len(violations) == 1
    assert violations[0].code == "dangling-foreign-key"
    assert violations[0].details["value"] == [999]


def test_null_fk_is_not_a_violation(sdl, olympic_rows):
    rows = dict(olympic_rows)
    rows["Day"] = list(rows["Day"]) + [(900, datetime.date(2009, 1, 1), "Thu", None)]
    store = load_store(sdl, rows)
    assert [v for v in store.check_foreign_keys() if v.subject == "Day"] == []


def test_empty_child_table_has_no_violations():
    parent = Table("P", (Column("K", Datatype.INTEGER),), ("K",))
    child = Table(
        "C",
        (Column("K", Datatype.INTEGER), Column("P", Datatype.INTEGER)),
        ("K",),
        (ForeignKey(("P",), "P", ("K",)),),
    )
    store = Store()
    store.load_table(parent, "K\n1\n")
    store.load_table(child, "K,P\n")
    assert store.check_foreign_keys() == []


# --------------------------------------------------------------------------
# Evaluation


def test_select_weekend_rows_matches_row_filter_oracle(store, olympic_rows):
    plan = Select(Scan("Day"), Comparison("DayOfWeek", ComparisonOp.IN, ("Sat", "Sun")))
    result = evaluate(plan, store)
    expected = [row for row in olympic_rows["Day"] if row[2] in ("Sat", "Sun")]
    assert sorted(result.rows) == sorted(expected)


def test_join_on_total_fk_preserves_day_count(store):
    right = Project(Scan("WeekMonth"), (ProjectItem("WMID", "WeekMonthID"),))
    plan = Join(Scan("Day"), right, (("WeekMonthID", "WMID"),))
    result = evaluate(plan, store)
    # Nested-loop oracle.
    days = store.relation("Day")
    periods = store.relation("WeekMonth")
    expected = 0
    for day in days.rows:
        for period in periods.rows:
            if day[3] == period[0]:
                expected += 1
    assert len(result.rows) == expected == len(days.rows)


def test_aggregate_empty_input_scalar_sum_is_null(store):
    plan = Aggregate(
        Select(Scan("Day"), Comparison("DayOfWeek", ComparisonOp.EQUALS, ("Nonesuch",))),
        (),
        (
            Aggregation(AggregateFunction.SUM, "DayID", "sum(DayID)"),
            Aggregation(AggregateFunction.COUNT, None, "count"),
            Aggregation(AggregateFunction.AVG, "DayID", "avg"),
        ),
    )
    result = evaluate(plan, store)
    assert result.rows == [(None, 0, None)]


def test_aggregate_with_group_by_over_empty_input_is_empty(store):
    plan = Aggregate(
        Select(Scan("Day"), Comparison("DayOfWeek", ComparisonOp.EQUALS, ("Nonesuch",))),
        ("DayOfWeek",),
        (Aggregation(AggregateFunction.COUNT, None, "count"),),
    )
    assert evaluate(plan, store).rows == []


def test_aggregates_skip_nulls():
    table = Table("T", (Column("K", Datatype.INTEGER), Column("V", Datatype.INTEGER)), ("K",))
    store = Store()
    store.load_table(table, "K,V\n1,10\n2,\n3,20\n")
    plan = Aggregate(
        Scan("T"),
        (),
        (
            Aggregation(AggregateFunction.SUM, "V", "s"),
            Aggregation(AggregateFunction.COUNT, None, "c"),
            Aggregation(AggregateFunction.AVG, "V", "a"),
            Aggregation(AggregateFunction.MIN, "V", "lo"),
            Aggregation(AggregateFunction.MAX, "V", "hi"),
        ),
    )
    assert evaluate(plan, store).rows == [(30, 3, decimal.Decimal("15"), 10, 20)]


def test_conditions_never_match_null():
    table = Table("T", (Column("K", Datatype.INTEGER), Column("V", Datatype.STRING)), ("K",))
    store = Store()
    store.load_table(table, "K,V\n1,\n2,x\n")
    for op, values in (
        (ComparisonOp.EQUALS, ("x",)),
        (ComparisonOp.IN, ("x", "")),
        (ComparisonOp.LESS_THAN, ("z",)),
        (ComparisonOp.GREATER_THAN, ("a",)),
    ):
        result = evaluate(Select(Scan("T"), Comparison("V", op, values)), store)
        assert all(row[1] is not None for row in result.rows), op


def test_plan_type_errors():
    store = Store()
    store.load_table(Table("T", (Column("A", Datatype.INTEGER),), ("A",)), "A\n1\n")
    with pytest.raises(PlanError):
        evaluate(Scan("Missing"), store)
    with pytest.raises(PlanError):
        evaluate(Select(Scan("T"), Comparison("Z", ComparisonOp.EQUALS, (1,))), store)
    with pytest.raises(PlanError):
        evaluate(Project(Scan("T"), (ProjectItem("B", "B"),)), store)
    with pytest.raises(PlanError):
        evaluate(Aggregate(Scan("T"), (), (Aggregation(AggregateFunction.SUM, None, "s"),)), store)
    with pytest.raises(PlanError):
        evaluate(Union((Scan("T"), Project(Scan("T"), (ProjectItem("X", "A"),)))), store)


def test_concurrent_reads_are_stable(store, compiled):
    plan = compiled.view("level:Weekend").body
    with ThreadPoolExecutor(max_workers=8) as pool:
        results = list(pool.map(lambda _: rows_multiset(evaluate(plan, store)), range(16)))
    assert all(r == results[0] for r in results)


# --------------------------------------------------------------------------
# Algebraic identities on random small relations


def _store_with(rows):
    table = Table(
        "R",
        (Column("K", Datatype.INTEGER), Column("G", Datatype.INTEGER), Column("V", Datatype.INTEGER)),
        ("K",),
    )
    lines = ["K,G,V"] + [f"{k},{g},{'' if v is None else v}" for k, (g, v) in enumerate(rows)]
    store = Store()
    store.load_table(table, "\n".join(lines) + "\n")
    return store


small_rows = st.lists(
    st.tuples(st.integers(min_value=0, max_value=3), st.one_of(st.none(), st.integers(-50, 50))),
    max_size=30,
)


@given(small_rows, st.integers(0, 3), st.integers(-50, 50))
@settings(max_examples=60, deadline=None)
def test_select_composition_equals_conjunction(rows, g, v):
    store = _store_with(rows)
    p = Comparison("G", ComparisonOp.EQUALS, (g,))
    q = Comparison("V", ComparisonOp.LESS_THAN, (v,))
    nested = evaluate(Select(Select(Scan("R"), q), p), store)
    combined = evaluate(Select(Scan("R"), And((q, p))), store)
    assert sorted(nested.rows) == sorted(combined.rows)


@given(small_rows)
@settings(max_examples=40, deadline=None)
def test_project_is_idempotent_on_same_columns(rows):
    store = _store_with(rows)
    items = (ProjectItem("G", "G"), ProjectItem("V", "V"))
    once = evaluate(Project(Scan("R"), items), store)
    twice = evaluate(Project(Project(Scan("R"), items), items), store)
    assert once.schema == twice.schema and sorted(map(repr, once.rows)) == sorted(map(repr, twice.rows))


@given(small_rows)
@settings(max_examples=40, deadline=None)
def test_aggregate_distributes_over_disjoint_group_partition(rows):
    """Aggregating a union of disjoint groups equals the union of the
    per-group aggregates; this is what makes roll-up well-defined."""
    store = _store_with(rows)
    aggs = (
        Aggregation(AggregateFunction.SUM, "V", "s"),
        Aggregation(AggregateFunction.COUNT, None, "c"),
    )
    whole = evaluate(Aggregate(Scan("R"), ("G",), aggs), store)
    pieces = []
    for g in range(4):
        part = evaluate(
            Aggregate(Select(Scan("R"), Comparison("G", ComparisonOp.EQUALS, (g,))), ("G",), aggs), store
        )
        pieces.extend(part.rows)
    assert sorted(map(repr, whole.rows)) == sorted(map(repr, pieces))


# --------------------------------------------------------------------------
# Derived SDL


def test_derive_sdl_classifies_attends_as_fact(store):
    derived = store.derive_sdl("OlympicDW")
    fact_names = [t.name for t in derived.fact_tables]
    # Classification rule applied by hand: Attends is referenced by no
    # table and has 4 outgoing FKs; every other table fails one test.
    assert fact_names == ["Attends"]
    assert {t.name for t in derived.dimension_tables} == {
        "Country", "City", "Venue", "Year", "WeekMonth", "Day", "Event", "Attendee",
    }


def test_derive_sdl_single_fk_table_is_dimension():
    store = Store()
    parent = Table("P", (Column("K", Datatype.INTEGER),), ("K",))
    child = Table(
        "C",
        (Column("K", Datatype.INTEGER), Column("P", Datatype.INTEGER)),
        ("K",),
        (ForeignKey(("P",), "P", ("K",)),),
    )
    store.load_table(parent, "K\n1\n")
    store.load_table(child, "K,P\n1,1\n")
    derived = store.derive_sdl()
    assert derived.fact_tables == ()
    assert {t.name for t in derived.dimension_tables} == {"P", "C"}


def test_derive_sdl_empty_store():
    derived = Store().derive_sdl()
    assert derived.tables == ()


def test_derived_sdl_round_trips_loaded_metadata(store, sdl):
    derived = store.derive_sdl("OlympicDW")
    assert {t.name: t for t in derived.tables} == {t.name: t for t in sdl.tables}
