"""Generator contracts: determinism, consistency, scale handling."""

import random

from cim.compiler import (
    check_cardinalities,
    check_exclusivity,
    check_summarizability,
    compile_views,
)
from cim.fixtures import WHISTLER, generate_olympic_data, olympic_tables, table_csv
from cim.query import resolve_query
from cim.randgen import generate_random_instance, random_query
from cim.validation import validate_cdl, validate_mdl, validate_sdl

from conftest import load_store


def test_day_partition_and_whistler_present(olympic_rows):
    days = olympic_rows["Day"]
    assert len(days) == 366
    weekday = [d for d in days if d[2] in ("Mon", "Tue", "Wed", "Thu", "Fri")]
    weekend = [d for d in days if d[2] in ("Sat", "Sun")]
    assert len(weekday) + len(weekend) == 366
    assert {v[1] for v in olympic_rows["Venue"]} >= {WHISTLER}


def test_scale_controls_fact_count():
    assert len(olympic_tables(seed=1, scale=137)["Attends"]) == 137


def test_scale_zero_keeps_dimensions():
    rows = olympic_tables(seed=1, scale=0)
    assert rows["Attends"] == []
    assert len(rows["Day"]) == 366 and len(rows["Venue"]) == 6


def test_fact_grain_is_unique(olympic_rows):
    keys = [row[:4] for row in olympic_rows["Attends"]]
    assert len(keys) == len(set(keys))


def test_generated_data_is_fk_consistent(sdl):
    store = load_store(sdl, olympic_tables(seed=3, scale=2000))
    assert store.check_foreign_keys() == []


def test_generation_is_deterministic(tmp_path):
    first = tmp_path / "a"
    second = tmp_path / "b"
    generate_olympic_data(42, 250, first)
    generate_olympic_data(42, 250, second)
    for path in sorted(first.iterdir()):
        assert path.read_bytes() == (second / path.name).read_bytes(), path.name


def test_csv_bytes_are_seed_stable(sdl):
    rows_a = olympic_tables(seed=11, scale=100)
    rows_b = olympic_tables(seed=11, scale=100)
    for table in sdl.tables:
        assert table_csv(table, rows_a[table.name]) == table_csv(table, rows_b[table.name])


def test_random_instances_pass_validate_compile_check():
    for seed in range(15):
        instance = generate_random_instance(seed)
        diagnostics = (
            validate_cdl(instance.cdl)
            + validate_sdl(instance.sdl)
            + validate_mdl(instance.cdl, instance.sdl, instance.mdl)
        )
        assert diagnostics == [], (seed, diagnostics)
        compiled = compile_views(instance.cdl, instance.sdl, instance.mdl)
        assert compiled.ok, (seed, compiled.diagnostics)
        store = instance.store()
        assert store.check_foreign_keys() == []
        assert check_exclusivity(instance.cdl, compiled, store) == []
        assert check_cardinalities(instance.cdl, compiled, store) == []
        assert check_summarizability(instance.cdl, compiled, store).summarizable


def test_random_instance_seed_replay_is_identical():
    first = generate_random_instance(123)
    second = generate_random_instance(123)
    assert first.cdl == second.cdl and first.sdl == second.sdl and first.mdl == second.mdl
    assert first.tables == second.tables


def test_random_queries_resolve_against_their_instance():
    for seed in (0, 5, 9):
        instance = generate_random_instance(seed)
        rng = random.Random(seed)
        for _ in range(20):
            query = random_query(instance, rng)
            resolve_query(query, instance.cdl)  # must not raise
