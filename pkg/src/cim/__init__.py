"""Conceptual-model run-time: parse CDL/SDL/MDL, compile views, query.

The package follows the pipeline: :mod:`cim.xmlio` parses the three
model documents, :mod:`cim.validation` checks them, :mod:`cim.compiler`
turns the mapping into relational views over the embedded store
(:mod:`cim.storage`), and :mod:`cim.query` answers aggregation queries
by rewriting over those views.  :mod:`cim.oracle` is the brute-force
reference used for differential testing, and :mod:`cim.fixtures` ships
the Olympic example.
"""

from .compiler import (
    CompileResult,
    ViewDefinition,
    ViewTarget,
    check_cardinalities,
    check_exclusivity,
    check_summarizability,
    compile_views,
    materialize_views,
    views_to_dict,
    views_to_json,
)
from .graph import build_graph, export_graph_json
from .model import (
    Cardinality,
    CdlModel,
    Column,
    Condition,
    ConditionOperator,
    Datatype,
    Diagnostic,
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
    Severity,
    Table,
)
from .oracle import oracle_execute
from .query import (
    CqlQuery,
    CqlSyntaxError,
    QueryCondition,
    QueryError,
    QueryNameError,
    execute,
    parse_cql,
    query_from_dict,
    query_to_dict,
    resolve_query,
    rewrite,
)
from .storage import (
    AggregateFunction,
    LoadError,
    Plan,
    PlanError,
    Relation,
    StorageError,
    Store,
    Violation,
    evaluate,
)
from .validation import validate_cdl, validate_mdl, validate_sdl
from .xmlio import DocumentKind, XmlDocumentError, parse, serialize

__version__ = "0.1.0"
