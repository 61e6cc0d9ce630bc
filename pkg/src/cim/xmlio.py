"""XML serialization for the three model documents.

The concrete element vocabulary is frozen by the XSD files shipped in
``cim/schemas/``; those schemas are the normative spelling reference.
Key/keyref-style referential rules are deliberately NOT enforced here
but by :mod:`cim.validation`, which keeps error messages domain-level
and this module dependency-light (expat + ElementTree only).

Parsing is strict by default: unknown elements or attributes fail with
their line number.  Lenient mode ignores unknown vocabulary instead.
"""

from __future__ import annotations

import enum
import io
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from xml.parsers import expat

from .model import (
    Cardinality,
    CdlModel,
    Column,
    Condition,
    ConditionOperator,
    Datatype,
    Dimension,
    FactRelationship,
    ForeignKey,
    FragmentKind,
    Hierarchy,
    Level,
    MappingFragment,
    MdlModel,
    ParentChildRel,
    Property,
    PropertyMapping,
    Role,
    SdlModel,
    Table,
)


class DocumentKind(str, enum.Enum):
    CDL = "cdl"
    SDL = "sdl"
    MDL = "mdl"


class XmlDocumentError(Exception):
    """Raised for syntax errors and vocabulary violations, with position."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        position = ""
        if line is not None:
            position = f" at line {line}" + (f", column {column}" if column is not None else "")
        super().__init__(message + position)


@dataclass
class _Node:
    tag: str
    attrib: dict[str, str]
    line: int
    column: int
    text: str = ""
    children: list["_Node"] = field(default_factory=list)


def _read_tree(document: bytes | str) -> _Node:
    if isinstance(document, str):
        document = document.encode("utf-8")
    parser = expat.ParserCreate()
    root: list[_Node] = []
    stack: list[_Node] = []

    def start(tag, attrs):
        node = _Node(tag=tag, attrib=dict(attrs), line=parser.CurrentLineNumber, column=parser.CurrentColumnNumber + 1)
        if stack:
            stack[-1].children.append(node)
        else:
            root.append(node)
        stack.append(node)

    def end(_tag):
        stack.pop()

    def chars(data):
        if stack:
            stack[-1].text += data

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.CharacterDataHandler = chars
    try:
        parser.Parse(document, True)
    except expat.ExpatError as exc:
        raise XmlDocumentError(
            f"XML syntax error: {expat.errors.messages[exc.code]}", exc.lineno, exc.offset + 1
        ) from exc
    if not root:
        raise XmlDocumentError("document is empty")
    return root[0]


class _Reader:
    """Walks the raw tree, enforcing the vocabulary in strict mode."""

    def __init__(self, strict: bool):
        self.strict = strict

    def fail(self, node: _Node, message: str):
        raise XmlDocumentError(message, node.line, node.column)

    def children(self, node: _Node, allowed: tuple[str, ...]) -> list[_Node]:
        kept = []
        for child in node.children:
            if child.tag in allowed:
                kept.append(child)
            elif self.strict:
                self.fail(child, f"unknown element <{child.tag}> inside <{node.tag}>")
        return kept

    def attrs(self, node: _Node, required: tuple[str, ...], optional: tuple[str, ...] = ()) -> dict[str, str]:
        if self.strict:
            for name in node.attrib:
                if name not in required and name not in optional:
                    self.fail(node, f"unknown attribute {name!r} on <{node.tag}>")
        for name in required:
            if name not in node.attrib:
                self.fail(node, f"<{node.tag}> is missing required attribute {name!r}")
        return node.attrib

    def one(self, node: _Node, tag: str) -> _Node:
        found = [c for c in node.children if c.tag == tag]
        if len(found) != 1:
            self.fail(node, f"<{node.tag}> must contain exactly one <{tag}>")
        return found[0]

    def datatype(self, node: _Node, text: str) -> Datatype:
        try:
            return Datatype(text)
        except ValueError:
            self.fail(node, f"unknown datatype {text!r}")

    def cardinality(self, node: _Node, text: str) -> Cardinality:
        try:
            return Cardinality.parse(text)
        except ValueError as exc:
            self.fail(node, str(exc))


def _parse_property(r: _Reader, node: _Node) -> Property:
    a = r.attrs(node, required=("name", "type"))
    return Property(name=a["name"], type=r.datatype(node, a["type"]))


def _parse_cdl(r: _Reader, root: _Node) -> CdlModel:
    a = r.attrs(root, required=("name",))
    for tag in ("levelSet", "dimensionSet", "factRelationshipSet"):
        if not any(c.tag == tag for c in root.children):
            r.fail(root, f"<cdl> is missing required <{tag}>")

    levels = []
    for node in r.children(root, ("levelSet", "dimensionSet", "hierarchySet", "factRelationshipSet")):
        if node.tag != "levelSet":
            continue
        for lnode in r.children(node, ("level",)):
            la = r.attrs(lnode, required=("name",))
            properties = []
            key: list[str] = []
            for child in r.children(lnode, ("property", "key")):
                if child.tag == "property":
                    properties.append(_parse_property(r, child))
                else:
                    for ref in r.children(child, ("propertyRef",)):
                        key.append(r.attrs(ref, required=("name",))["name"])
            levels.append(Level(name=la["name"], properties=tuple(properties), key=tuple(key)))

    dimensions = []
    for node in root.children:
        if node.tag != "dimensionSet":
            continue
        for dnode in r.children(node, ("dimension",)):
            da = r.attrs(dnode, required=("name", "bottomLevel"))
            hrefs = [
                r.attrs(ref, required=("name",))["name"]
                for ref in r.children(dnode, ("hierarchyRef",))
            ]
            dimensions.append(Dimension(name=da["name"], bottom_level=da["bottomLevel"], hierarchies=tuple(hrefs)))

    hierarchies = []
    for node in root.children:
        if node.tag != "hierarchySet":
            continue
        for hnode in r.children(node, ("hierarchy",)):
            ha = r.attrs(hnode, required=("name",))
            rels = []
            for rnode in r.children(hnode, ("parentChild",)):
                ra = r.attrs(
                    rnode,
                    required=("childLevel", "parentLevel", "childCard", "parentCard"),
                    optional=("exclusiveGroup",),
                )
                rels.append(
                    ParentChildRel(
                        child_level=ra["childLevel"],
                        parent_level=ra["parentLevel"],
                        child_card=r.cardinality(rnode, ra["childCard"]),
                        parent_card=r.cardinality(rnode, ra["parentCard"]),
                        exclusive_group=ra.get("exclusiveGroup"),
                    )
                )
            hierarchies.append(Hierarchy(name=ha["name"], relationships=tuple(rels)))

    facts = []
    for node in root.children:
        if node.tag != "factRelationshipSet":
            continue
        for fnode in r.children(node, ("factRelationship",)):
            fa = r.attrs(fnode, required=("name",))
            roles, measures, properties = [], [], []
            for child in r.children(fnode, ("role", "measure", "property")):
                if child.tag == "role":
                    ca = r.attrs(child, required=("name", "dimension"))
                    roles.append(Role(name=ca["name"], dimension=ca["dimension"]))
                elif child.tag == "measure":
                    measures.append(_parse_property(r, child))
                else:
                    properties.append(_parse_property(r, child))
            facts.append(
                FactRelationship(
                    name=fa["name"], roles=tuple(roles), measures=tuple(measures), properties=tuple(properties)
                )
            )

    return CdlModel(
        name=a["name"],
        levels=tuple(levels),
        dimensions=tuple(dimensions),
        hierarchies=tuple(hierarchies),
        fact_relationships=tuple(facts),
    )


def _parse_table(r: _Reader, tnode: _Node) -> Table:
    ta = r.attrs(tnode, required=("name",))
    columns = []
    primary_key: list[str] = []
    foreign_keys = []
    for child in r.children(tnode, ("column", "primaryKey", "foreignKey")):
        if child.tag == "column":
            ca = r.attrs(child, required=("name", "type"))
            columns.append(Column(name=ca["name"], type=r.datatype(child, ca["type"])))
        elif child.tag == "primaryKey":
            for ref in r.children(child, ("columnRef",)):
                primary_key.append(r.attrs(ref, required=("name",))["name"])
        else:
            fa = r.attrs(child, required=("targetTable",))
            local, target = [], []
            for pair in r.children(child, ("columnPair",)):
                pa = r.attrs(pair, required=("local", "target"))
                local.append(pa["local"])
                target.append(pa["target"])
            foreign_keys.append(
                ForeignKey(columns=tuple(local), target_table=fa["targetTable"], target_columns=tuple(target))
            )
    return Table(
        name=ta["name"], columns=tuple(columns), primary_key=tuple(primary_key), foreign_keys=tuple(foreign_keys)
    )


def _parse_sdl(r: _Reader, root: _Node) -> SdlModel:
    a = r.attrs(root, required=("name",))
    fact_tables, dimension_tables = [], []
    for node in r.children(root, ("factTableSet", "dimensionTableSet")):
        bucket = fact_tables if node.tag == "factTableSet" else dimension_tables
        for tnode in r.children(node, ("table",)):
            bucket.append(_parse_table(r, tnode))
    return SdlModel(name=a["name"], fact_tables=tuple(fact_tables), dimension_tables=tuple(dimension_tables))


def _parse_mdl(r: _Reader, root: _Node) -> MdlModel:
    r.attrs(root, required=())
    fragments = []
    for node in r.children(root, ("level-mapping", "factrel-mapping")):
        kind = FragmentKind.LEVEL if node.tag == "level-mapping" else FragmentKind.FACT_RELATIONSHIP
        entity_attr = "level" if kind is FragmentKind.LEVEL else "factRelationship"
        a = r.attrs(node, required=(entity_attr, "table"), optional=("name",))
        mappings = []
        conditions = []
        for child in r.children(node, ("property-mapping", "condition")):
            if child.tag == "property-mapping":
                pa = r.attrs(child, required=("property", "column"))
                mappings.append(PropertyMapping(property=pa["property"], column=pa["column"]))
            else:
                ca = r.attrs(child, required=("column", "operator"))
                try:
                    operator = ConditionOperator(ca["operator"])
                except ValueError:
                    r.fail(child, f"unknown condition operator {ca['operator']!r}")
                values = [v.text for v in r.children(child, ("value",))]
                conditions.append(Condition(column=ca["column"], operator=operator, values=tuple(values)))
        fragments.append(
            MappingFragment(
                kind=kind,
                cdl_entity=a[entity_attr],
                sdl_table=a["table"],
                property_mappings=tuple(mappings),
                conditions=tuple(conditions),
                name=a.get("name"),
            )
        )
    return MdlModel(fragments=tuple(fragments))


_ROOT_TAGS = {DocumentKind.CDL: "cdl", DocumentKind.SDL: "sdl", DocumentKind.MDL: "mdl"}


def parse(kind: DocumentKind, document: bytes | str, strict: bool = True) -> CdlModel | SdlModel | MdlModel:
    """Parse one model document of the given kind.

    Raises XmlDocumentError on syntax errors, on vocabulary violations
    in strict mode, and on malformed literals (datatypes,
    cardinalities).  Referential problems are not raised here; run the
    validators on the result.
    """
    root = _read_tree(document)
    reader = _Reader(strict=strict)
    expected = _ROOT_TAGS[kind]
    if root.tag != expected:
        reader.fail(root, f"expected root element <{expected}>, found <{root.tag}>")
    if kind is DocumentKind.CDL:
        return _parse_cdl(reader, root)
    if kind is DocumentKind.SDL:
        return _parse_sdl(reader, root)
    return _parse_mdl(reader, root)


def _property_element(parent: ET.Element, tag: str, prop: Property) -> None:
    ET.SubElement(parent, tag, name=prop.name, type=prop.type.value)


def _serialize_cdl(model: CdlModel) -> ET.Element:
    root = ET.Element("cdl", name=model.name)
    level_set = ET.SubElement(root, "levelSet")
    for level in model.levels:
        lnode = ET.SubElement(level_set, "level", name=level.name)
        for prop in level.properties:
            _property_element(lnode, "property", prop)
        key = ET.SubElement(lnode, "key")
        for prop_name in level.key:
            ET.SubElement(key, "propertyRef", name=prop_name)
    dim_set = ET.SubElement(root, "dimensionSet")
    for dim in model.dimensions:
        dnode = ET.SubElement(dim_set, "dimension", name=dim.name, bottomLevel=dim.bottom_level)
        for hname in dim.hierarchies:
            ET.SubElement(dnode, "hierarchyRef", name=hname)
    if model.hierarchies:
        h_set = ET.SubElement(root, "hierarchySet")
        for hierarchy in model.hierarchies:
            hnode = ET.SubElement(h_set, "hierarchy", name=hierarchy.name)
            for rel in hierarchy.relationships:
                attrs = {
                    "childLevel": rel.child_level,
                    "parentLevel": rel.parent_level,
                    "childCard": str(rel.child_card),
                    "parentCard": str(rel.parent_card),
                }
                if rel.exclusive_group is not None:
                    attrs["exclusiveGroup"] = rel.exclusive_group
                ET.SubElement(hnode, "parentChild", attrs)
    fact_set = ET.SubElement(root, "factRelationshipSet")
    for fact in model.fact_relationships:
        fnode = ET.SubElement(fact_set, "factRelationship", name=fact.name)
        for role in fact.roles:
            ET.SubElement(fnode, "role", name=role.name, dimension=role.dimension)
        for measure in fact.measures:
            _property_element(fnode, "measure", measure)
        for prop in fact.properties:
            _property_element(fnode, "property", prop)
    return root


def _serialize_sdl(model: SdlModel) -> ET.Element:
    root = ET.Element("sdl", name=model.name)
    for tag, tables in (("factTableSet", model.fact_tables), ("dimensionTableSet", model.dimension_tables)):
        set_node = ET.SubElement(root, tag)
        for table in tables:
            tnode = ET.SubElement(set_node, "table", name=table.name)
            for column in table.columns:
                ET.SubElement(tnode, "column", name=column.name, type=column.type.value)
            pk = ET.SubElement(tnode, "primaryKey")
            for col in table.primary_key:
                ET.SubElement(pk, "columnRef", name=col)
            for fk in table.foreign_keys:
                fknode = ET.SubElement(tnode, "foreignKey", targetTable=fk.target_table)
                for local, target in zip(fk.columns, fk.target_columns):
                    ET.SubElement(fknode, "columnPair", local=local, target=target)
    return root


def _serialize_mdl(model: MdlModel) -> ET.Element:
    root = ET.Element("mdl")
    for frag in model.fragments:
        tag = frag.kind.value
        attrs = {}
        if frag.name is not None:
            attrs["name"] = frag.name
        attrs["level" if frag.kind is FragmentKind.LEVEL else "factRelationship"] = frag.cdl_entity
        attrs["table"] = frag.sdl_table
        fnode = ET.SubElement(root, tag, attrs)
        for pm in frag.property_mappings:
            ET.SubElement(fnode, "property-mapping", property=pm.property, column=pm.column)
        for cond in frag.conditions:
            cnode = ET.SubElement(fnode, "condition", column=cond.column, operator=cond.operator.value)
            for value in cond.values:
                vnode = ET.SubElement(cnode, "value")
                vnode.text = value
    return root


def serialize(model: CdlModel | SdlModel | MdlModel) -> bytes:
    """Emit the document form of a model; parse() inverts this exactly."""
    if isinstance(model, CdlModel):
        root = _serialize_cdl(model)
    elif isinstance(model, SdlModel):
        root = _serialize_sdl(model)
    elif isinstance(model, MdlModel):
        root = _serialize_mdl(model)
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    tree = ET.ElementTree(root)
    ET.indent(tree)
    buffer = io.BytesIO()
    tree.write(buffer, encoding="utf-8", xml_declaration=True)
    return buffer.getvalue()


def document_kind_of(model: CdlModel | SdlModel | MdlModel) -> DocumentKind:
    if isinstance(model, CdlModel):
        return DocumentKind.CDL
    if isinstance(model, SdlModel):
        return DocumentKind.SDL
    return DocumentKind.MDL
