"""Parsing, serialization, and the round-trip guarantee."""

import pytest

from cim.graph import build_graph
from cim.model import CdlModel, MdlModel, SdlModel
from cim.randgen import generate_random_instance
from cim.validation import validate_cdl, validate_mdl, validate_sdl
from cim.xmlio import DocumentKind, XmlDocumentError, parse, serialize

WEEKEND_LEVEL_DOC = """<?xml version="1.0"?>
<cdl name="mini">
  <levelSet>
    <level name="Weekend">
      <property name="DayID" type="integer"/>
      <property name="FullDate" type="date"/>
      <property name="DayOfWeek" type="string"/>
      <key><propertyRef name="DayID"/></key>
    </level>
  </levelSet>
  <dimensionSet/>
  <factRelationshipSet/>
</cdl>
"""

WEEKEND_MAPPING_DOC = """<?xml version="1.0"?>
<mdl>
  <level-mapping name="S2" level="Weekend" table="Day">
    <property-mapping property="DayID" column="DayID"/>
    <condition column="DayOfWeek" operator="in">
      <value>Sat</value>
      <value>Sun</value>
    </condition>
  </level-mapping>
</mdl>
"""


def test_parse_weekend_level_document():
    model = parse(DocumentKind.CDL, WEEKEND_LEVEL_DOC)
    level = model.level("Weekend")
    assert level is not None
    assert [p.name for p in level.properties] == ["DayID", "FullDate", "DayOfWeek"]
    assert level.key == ("DayID",)


def test_parse_weekend_mapping_document():
    model = parse(DocumentKind.MDL, WEEKEND_MAPPING_DOC)
    assert len(model.fragments) == 1
    fragment = model.fragments[0]
    assert fragment.name == "S2"
    assert fragment.cdl_entity == "Weekend"
    assert fragment.sdl_table == "Day"
    assert fragment.conditions[0].values == ("Sat", "Sun")


def test_empty_sets_yield_empty_model():
    doc = '<cdl name="empty"><levelSet/><dimensionSet/><factRelationshipSet/></cdl>'
    model = parse(DocumentKind.CDL, doc)
    assert model.levels == () and model.dimensions == () and model.fact_relationships == ()


def test_syntax_error_reports_position():
    with pytest.raises(XmlDocumentError) as err:
        parse(DocumentKind.CDL, "<cdl name='x'>\n  <levelSet>\n</cdl>")
    assert err.value.line is not None


def test_strict_mode_rejects_misspelled_element_with_position():
    doc = WEEKEND_LEVEL_DOC.replace("<property name=\"DayID\"", "<propert name=\"DayID\"")
    with pytest.raises(XmlDocumentError) as err:
        parse(DocumentKind.CDL, doc)
    assert "propert" in str(err.value)
    assert err.value.line == 5


def test_lenient_mode_ignores_unknown_vocabulary():
    doc = WEEKEND_LEVEL_DOC.replace(
        "<key>", "<comment>ignore me</comment><key>"
    )
    model = parse(DocumentKind.CDL, doc, strict=False)
    assert model.level("Weekend").key == ("DayID",)


def test_unknown_datatype_is_rejected():
    doc = WEEKEND_LEVEL_DOC.replace('type="date"', 'type="timestamp"')
    with pytest.raises(XmlDocumentError) as err:
        parse(DocumentKind.CDL, doc)
    assert "timestamp" in str(err.value)


def test_malformed_cardinality_is_rejected(cdl):
    doc = serialize(cdl).decode("utf-8").replace('childCard="(1,n)"', 'childCard="(2,9)"', 1)
    with pytest.raises(XmlDocumentError):
        parse(DocumentKind.CDL, doc)


def test_wrong_root_element():
    with pytest.raises(XmlDocumentError):
        parse(DocumentKind.SDL, WEEKEND_LEVEL_DOC)


def test_olympic_round_trip(cdl, sdl, mdl):
    assert parse(DocumentKind.CDL, serialize(cdl)) == cdl
    assert parse(DocumentKind.SDL, serialize(sdl)) == sdl
    assert parse(DocumentKind.MDL, serialize(mdl)) == mdl


def test_olympic_documents_parse_validation_clean(cdl, sdl, mdl):
    cdl2 = parse(DocumentKind.CDL, serialize(cdl))
    sdl2 = parse(DocumentKind.SDL, serialize(sdl))
    mdl2 = parse(DocumentKind.MDL, serialize(mdl))
    assert validate_cdl(cdl2) == [] and validate_sdl(sdl2) == []
    assert validate_mdl(cdl2, sdl2, mdl2) == []


def test_random_instance_round_trip():
    for seed in range(10):
        instance = generate_random_instance(seed)
        assert parse(DocumentKind.CDL, serialize(instance.cdl)) == instance.cdl, seed
        assert parse(DocumentKind.SDL, serialize(instance.sdl)) == instance.sdl, seed
        assert parse(DocumentKind.MDL, serialize(instance.mdl)) == instance.mdl, seed


def test_serialize_empty_models_round_trip():
    empty_cdl = CdlModel("nothing")
    empty_sdl = SdlModel("nothing")
    empty_mdl = MdlModel()
    assert parse(DocumentKind.CDL, serialize(empty_cdl)) == empty_cdl
    assert parse(DocumentKind.SDL, serialize(empty_sdl)) == empty_sdl
    assert parse(DocumentKind.MDL, serialize(empty_mdl)) == empty_mdl


# --------------------------------------------------------------------------
# Graph export


def test_graph_city_country_edge_label(cdl, sdl, mdl):
    graph = build_graph(cdl, sdl, mdl)
    edge = next(
        e
        for e in graph["edges"]
        if e["kind"] == "parentChild" and e["from"] == "level:City" and e["to"] == "level:Country"
    )
    assert edge["label"] == "(1,n)-(1,1)"


def test_graph_s2_mapping_edge_label(cdl, sdl, mdl):
    graph = build_graph(cdl, sdl, mdl)
    edge = next(
        e
        for e in graph["edges"]
        if e["kind"] == "mapping" and e["from"] == "level:Weekend" and e["to"] == "table:Day"
    )
    assert edge["fragment"] == "S2"
    assert edge["label"] == "DayOfWeek ∈ {Sat,Sun}"


def test_graph_exclusive_group_tags(cdl, sdl, mdl):
    graph = build_graph(cdl, sdl, mdl)
    tagged = [e for e in graph["edges"] if e.get("exclusiveGroup") == "PeriodKind"]
    assert len(tagged) == 4


def test_graph_of_empty_models_has_no_nodes():
    graph = build_graph(CdlModel("e"), SdlModel("e"), MdlModel())
    assert graph["nodes"] == [] and graph["edges"] == []
    assert graph["formatVersion"] == 1


def test_export_graph_json_bytes(cdl, sdl, mdl):
    import json

    from cim.graph import export_graph_json

    document = json.loads(export_graph_json(cdl, sdl, mdl).decode("utf-8"))
    assert document == build_graph(cdl, sdl, mdl)
