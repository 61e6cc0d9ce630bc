"""End-to-end CLI behavior and exit-code contract."""

import json
import shutil

import pytest

from cim.cli import main
from cim.fixtures import WEEKEND_SALES_QUERY


@pytest.fixture()
def workspace(demo_workspace, tmp_path):
    copy = tmp_path / "ws"
    shutil.copytree(demo_workspace, copy)
    return copy


def test_validate_clean_workspace(workspace, capsys):
    assert main(["validate", str(workspace)]) == 0
    assert "valid" in capsys.readouterr().err


def test_validate_broken_keyref(workspace, capsys):
    cdl = (workspace / "cdl.xml").read_text(encoding="utf-8")
    (workspace / "cdl.xml").write_text(
        cdl.replace('<propertyRef name="VenueID" />', '<propertyRef name="VenuID" />'), encoding="utf-8"
    )
    assert main(["validate", str(workspace)]) == 1
    err = capsys.readouterr().err
    assert "key-not-a-property" in err
    assert err.strip().count("\n") == 0  # exactly one diagnostic


def test_validate_missing_model_file(workspace, capsys):
    (workspace / "mdl.xml").unlink()
    assert main(["validate", str(workspace)]) == 2


def test_validate_unparseable_xml(workspace):
    (workspace / "sdl.xml").write_text("<sdl name='x'><factTableSet>", encoding="utf-8")
    assert main(["validate", str(workspace)]) == 2


def test_compile_emits_view_document(workspace, tmp_path, capsys):
    out = tmp_path / "views.json"
    assert main(["compile", str(workspace), "--emit", str(out)]) == 0
    document = json.loads(out.read_text(encoding="utf-8"))
    assert document["formatVersion"] == 1
    assert len(document["views"]) == 22
    targets = {v["target"]["id"] for v in document["views"]}
    assert "level:Weekend" in targets and "factRelationship:Attends" in targets


def test_compile_empty_mdl_exits_one(workspace, capsys):
    (workspace / "mdl.xml").write_text("<mdl/>", encoding="utf-8")
    assert main(["compile", str(workspace)]) == 1
    assert "unmapped-level" in capsys.readouterr().err


def test_compile_unwritable_emit_path(workspace):
    assert main(["compile", str(workspace), "--emit", str(workspace / "no" / "such" / "dir" / "v.json")]) == 2


def test_query_outputs_formats(workspace, capsys):
    assert main(["query", str(workspace), "AGGREGATE count() FROM Attends", "--format", "csv"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "count"
    assert out.splitlines()[1] == "500"

    assert main(["query", str(workspace), WEEKEND_SALES_QUERY, "--format", "json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["columns"] == ["Weekend.DayID", "Venue.VenueID", "Venue.Name", "sum(TicketPrice)"]

    assert main(["query", str(workspace), WEEKEND_SALES_QUERY, "--format", "table"]) == 0
    assert "Whistler Olympic Park" in capsys.readouterr().out


def test_query_rows_are_sorted(workspace, capsys):
    assert main(["query", str(workspace), WEEKEND_SALES_QUERY, "--format", "json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    ids = [row[0] for row in payload["rows"]]
    assert ids == sorted(ids)


def test_query_syntax_error_exits_one(workspace, capsys):
    assert main(["query", str(workspace), "AGGREGATE sum() FROM"]) == 1
    assert "position" in capsys.readouterr().err


def test_query_unknown_measure_exits_one(workspace, capsys):
    assert main(["query", str(workspace), "AGGREGATE sum(NoSuchMeasure) FROM Attends"]) == 1
    assert "TicketPrice" in capsys.readouterr().err


def test_query_oracle_flag_matches_engine(workspace, capsys):
    assert main(["query", str(workspace), WEEKEND_SALES_QUERY, "--format", "csv"]) == 0
    engine = capsys.readouterr().out
    assert main(["query", str(workspace), WEEKEND_SALES_QUERY, "--format", "csv", "--oracle"]) == 0
    assert capsys.readouterr().out == engine


def test_check_clean_workspace(workspace, capsys):
    assert main(["check", str(workspace)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["foreignKeys"] == [] and report["exclusivity"] == [] and report["cardinalities"] == []
    assert report["summarizability"]["summarizable"] is True


def test_check_detects_injected_dangling_fk(workspace, capsys):
    with (workspace / "data" / "Day.csv").open("a", encoding="utf-8") as fh:
        fh.write("999,2009-01-01,Thu,777\r\n")
    assert main(["check", str(workspace)]) == 1
    report = json.loads(capsys.readouterr().out)
    assert any(v["code"] == "dangling-foreign-key" for v in report["foreignKeys"])


def test_check_detects_overlapping_exclusive_conditions(workspace, capsys):
    mdl = (workspace / "mdl.xml").read_text(encoding="utf-8")
    (workspace / "mdl.xml").write_text(mdl.replace("<value>Fri</value>", "<value>Fri</value><value>Sat</value>"), encoding="utf-8")
    assert main(["check", str(workspace)]) == 1
    report = json.loads(capsys.readouterr().out)
    assert any(v["details"]["group"] == "DayKind" for v in report["exclusivity"])


def test_golden_file_matches_cli_output(workspace, capsys):
    golden = (workspace / "golden" / "weekend_sales.csv").read_bytes().decode("utf-8")
    query = (workspace / "queries" / "weekend_sales.cql").read_text(encoding="utf-8").strip()
    assert main(["query", str(workspace), query, "--format", "csv"]) == 0
    assert capsys.readouterr().out == golden


def test_init_demo_refuses_existing_workspace(workspace):
    assert main(["init-demo", str(workspace)]) == 2


def test_compile_without_emit_prints_the_document(workspace, capsys):
    assert main(["compile", str(workspace)]) == 0
    document = json.loads(capsys.readouterr().out)
    assert len(document["views"]) == 22
