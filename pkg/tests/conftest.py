import pytest

from cim.compiler import compile_views
from cim.fixtures import olympic_cdl, olympic_mdl, olympic_sdl, olympic_tables, table_csv
from cim.storage import Store

OLYMPIC_SEED = 7
OLYMPIC_SCALE = 500


@pytest.fixture(scope="session")
def cdl():
    return olympic_cdl()


@pytest.fixture(scope="session")
def sdl():
    return olympic_sdl()


@pytest.fixture(scope="session")
def mdl():
    return olympic_mdl()


@pytest.fixture(scope="session")
def olympic_rows():
    return olympic_tables(seed=OLYMPIC_SEED, scale=OLYMPIC_SCALE)


def load_store(sdl, rows) -> Store:
    store = Store()
    for table in sdl.tables:
        store.load_table(table, table_csv(table, rows[table.name]))
    store.freeze()
    return store


@pytest.fixture(scope="session")
def store(sdl, olympic_rows):
    return load_store(sdl, olympic_rows)


@pytest.fixture(scope="session")
def compiled(cdl, sdl, mdl):
    result = compile_views(cdl, sdl, mdl)
    assert result.ok, result.diagnostics
    return result


@pytest.fixture(scope="session")
def demo_workspace(tmp_path_factory):
    """An Olympic workspace on disk, written through the CLI."""
    from cim.cli import main

    root = tmp_path_factory.mktemp("olympic-ws") / "demo"
    assert main(["init-demo", str(root), "--seed", str(OLYMPIC_SEED), "--scale", str(OLYMPIC_SCALE)]) == 0
    return root


def rows_multiset(relation):
    return sorted(map(repr, relation.rows))
