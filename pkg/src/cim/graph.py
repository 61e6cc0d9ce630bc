"""Graph-JSON export of a full model triple for diagram rendering.

The format is documented in docs/FORMATS.md and versioned through
``formatVersion``.  Nodes carry the conceptual entities and store
tables; edges carry roll-up relations (with cardinality labels and
exclusive-group tags), role links, dimension-to-bottom-level
attachments, foreign keys, and the mapping lines with their condition
labels.
"""

from __future__ import annotations

import json

from .model import CdlModel, Dimension, FragmentKind, MdlModel, SdlModel

GRAPH_FORMAT_VERSION = 1


def _condition_label(fragment) -> str | None:
    if not fragment.conditions:
        return None
    return " ∧ ".join(cond.label() for cond in fragment.conditions)


def _hierarchy_marker_dimensions(cdl: CdlModel) -> list[Dimension]:
    # The diagram idiom shows a hierarchy oval only when a dimension
    # actually offers alternatives.
    return [d for d in cdl.dimensions if len(d.hierarchies) >= 2]


def build_graph(cdl: CdlModel, sdl: SdlModel, mdl: MdlModel) -> dict:
    nodes: list[dict] = []
    edges: list[dict] = []

    for level in cdl.levels:
        nodes.append(
            {
                "id": f"level:{level.name}",
                "kind": "level",
                "name": level.name,
                "properties": [{"name": p.name, "type": p.type.value} for p in level.properties],
                "key": list(level.key),
            }
        )
    for dim in cdl.dimensions:
        nodes.append(
            {
                "id": f"dimension:{dim.name}",
                "kind": "dimension",
                "name": dim.name,
                "bottomLevel": dim.bottom_level,
            }
        )
        edges.append({"kind": "bottomLevel", "from": f"dimension:{dim.name}", "to": f"level:{dim.bottom_level}"})
    for fact in cdl.fact_relationships:
        nodes.append(
            {
                "id": f"factRelationship:{fact.name}",
                "kind": "factRelationship",
                "name": fact.name,
                "measures": [{"name": m.name, "type": m.type.value} for m in fact.measures],
                "properties": [{"name": p.name, "type": p.type.value} for p in fact.properties],
            }
        )
        for role in fact.roles:
            edges.append(
                {
                    "kind": "role",
                    "from": f"factRelationship:{fact.name}",
                    "to": f"dimension:{role.dimension}",
                    "role": role.name,
                }
            )

    marker_dims = _hierarchy_marker_dimensions(cdl)
    for dim in marker_dims:
        for hname in dim.hierarchies:
            nodes.append({"id": f"hierarchy:{hname}", "kind": "hierarchy", "name": hname, "dimension": dim.name})
            edges.append({"kind": "hierarchy", "from": f"dimension:{dim.name}", "to": f"hierarchy:{hname}"})

    seen_rels = []
    for hierarchy in cdl.hierarchies:
        for rel in hierarchy.relationships:
            if rel in seen_rels:
                continue
            seen_rels.append(rel)
            edge = {
                "kind": "parentChild",
                "from": f"level:{rel.child_level}",
                "to": f"level:{rel.parent_level}",
                "childCard": str(rel.child_card),
                "parentCard": str(rel.parent_card),
                "label": f"{rel.child_card}-{rel.parent_card}",
            }
            if rel.exclusive_group is not None:
                edge["exclusiveGroup"] = rel.exclusive_group
            edges.append(edge)

    for table_kind, tables in (("fact", sdl.fact_tables), ("dimension", sdl.dimension_tables)):
        for table in tables:
            nodes.append(
                {
                    "id": f"table:{table.name}",
                    "kind": "table",
                    "name": table.name,
                    "tableKind": table_kind,
                    "columns": [{"name": c.name, "type": c.type.value} for c in table.columns],
                    "primaryKey": list(table.primary_key),
                }
            )
            for fk in table.foreign_keys:
                edges.append(
                    {
                        "kind": "foreignKey",
                        "from": f"table:{table.name}",
                        "to": f"table:{fk.target_table}",
                        "label": str(fk),
                    }
                )

    for fragment in mdl.fragments:
        prefix = "level" if fragment.kind is FragmentKind.LEVEL else "factRelationship"
        edge = {
            "kind": "mapping",
            "from": f"{prefix}:{fragment.cdl_entity}",
            "to": f"table:{fragment.sdl_table}",
        }
        if fragment.name is not None:
            edge["fragment"] = fragment.name
        label = _condition_label(fragment)
        if label is not None:
            edge["label"] = label
        edges.append(edge)

    return {"formatVersion": GRAPH_FORMAT_VERSION, "nodes": nodes, "edges": edges}


def export_graph_json(cdl: CdlModel, sdl: SdlModel, mdl: MdlModel) -> bytes:
    """Serialize the diagram graph; see build_graph for the structure."""
    return json.dumps(build_graph(cdl, sdl, mdl), indent=2, ensure_ascii=False).encode("utf-8")
