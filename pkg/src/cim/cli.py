"""Command-line entry point wiring the pipeline end to end.

Exit codes are a stable contract for scripting: 0 on success, 1 for
domain diagnostics (validation, compilation, check violations, query
errors), 2 for environment problems (missing files, XML or CSV parse
failures, unwritable output, ports in use).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import fixtures
from .compiler import check_cardinalities, check_exclusivity, check_summarizability, compile_views, views_to_json
from .model import errors_in
from .oracle import oracle_execute
from .query import QueryError, execute, parse_cql
from .render import relation_to_csv, relation_to_json, relation_to_table
from .storage import LoadError
from .workspace import MANIFEST_NAME, WorkspaceError, load_models, load_store
from .xmlio import serialize

OK, DIAGNOSTICS, ENVIRONMENT = 0, 1, 2


def _fail(message: str, code: int) -> int:
    print(message, file=sys.stderr)
    return code


def _print_diagnostics(diagnostics) -> None:
    for diagnostic in diagnostics:
        print(str(diagnostic), file=sys.stderr)


def _load_validated(root: Path):
    """(models, store, compiled) or an exit code for the failure."""
    models = load_models(root)
    diagnostics = models.validate()
    if errors_in(diagnostics):
        _print_diagnostics(diagnostics)
        return None
    return models, diagnostics


def cmd_validate(args) -> int:
    try:
        models = load_models(Path(args.workspace))
    except WorkspaceError as exc:
        return _fail(str(exc), ENVIRONMENT)
    diagnostics = models.validate()
    if diagnostics:
        _print_diagnostics(diagnostics)
        return DIAGNOSTICS if errors_in(diagnostics) else OK
    print(f"{models.manifest.name}: models are valid", file=sys.stderr)
    return OK


def cmd_compile(args) -> int:
    try:
        staged = _load_validated(Path(args.workspace))
    except WorkspaceError as exc:
        return _fail(str(exc), ENVIRONMENT)
    if staged is None:
        return DIAGNOSTICS
    models, _ = staged
    compiled = compile_views(models.cdl, models.sdl, models.mdl)
    if not compiled.ok:
        _print_diagnostics(compiled.diagnostics)
        return DIAGNOSTICS
    document = views_to_json(compiled, models.sdl)
    if args.emit:
        try:
            Path(args.emit).write_bytes(document)
        except OSError as exc:
            return _fail(f"cannot write {args.emit}: {exc}", ENVIRONMENT)
        print(f"{len(compiled.views)} views -> {args.emit}", file=sys.stderr)
    else:
        sys.stdout.write(document.decode("utf-8") + "\n")
    return OK


def _load_for_queries(root: Path):
    staged = _load_validated(root)
    if staged is None:
        return None
    models, _ = staged
    store = load_store(models)
    compiled = compile_views(models.cdl, models.sdl, models.mdl)
    if not compiled.ok:
        _print_diagnostics(compiled.diagnostics)
        return None
    return models, store, compiled


def cmd_query(args) -> int:
    try:
        loaded = _load_for_queries(Path(args.workspace))
    except WorkspaceError as exc:
        return _fail(str(exc), ENVIRONMENT)
    if loaded is None:
        return DIAGNOSTICS
    models, store, compiled = loaded
    try:
        query = parse_cql(args.query, models.cdl)
        if args.oracle:
            result = oracle_execute(query, models.cdl, models.sdl, models.mdl, store)
        else:
            result = execute(query, models.cdl, compiled, store)
    except QueryError as exc:
        return _fail(str(exc), DIAGNOSTICS)
    if args.format == "table":
        print(relation_to_table(result))
    elif args.format == "csv":
        sys.stdout.write(relation_to_csv(result))
    else:
        print(relation_to_json(result))
    return OK


def cmd_check(args) -> int:
    try:
        loaded = _load_for_queries(Path(args.workspace))
    except WorkspaceError as exc:
        return _fail(str(exc), ENVIRONMENT)
    if loaded is None:
        return DIAGNOSTICS
    models, store, compiled = loaded

    fk_violations = store.check_foreign_keys()
    exclusivity = check_exclusivity(models.cdl, compiled, store)
    cardinality = check_cardinalities(models.cdl, compiled, store)
    summarizability = check_summarizability(models.cdl, compiled, store)

    report = {
        "foreignKeys": [v.to_dict() for v in fk_violations],
        "exclusivity": [v.to_dict() for v in exclusivity],
        "cardinalities": [v.to_dict() for v in cardinality],
        "summarizability": summarizability.to_dict(),
    }
    print(json.dumps(report, indent=2, ensure_ascii=False))
    clean = not (fk_violations or exclusivity or cardinality) and summarizability.summarizable
    return OK if clean else DIAGNOSTICS


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    try:
        app = create_app(Path(args.workspace), materialize=args.materialize)
    except WorkspaceError as exc:
        return _fail(str(exc), ENVIRONMENT)
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    except (OSError, SystemExit) as exc:
        return _fail(f"cannot serve on {args.host}:{args.port}: {exc}", ENVIRONMENT)
    return OK


def cmd_init_demo(args) -> int:
    root = Path(args.directory)
    if (root / MANIFEST_NAME).exists():
        return _fail(f"{root} already holds a workspace", ENVIRONMENT)
    root.mkdir(parents=True, exist_ok=True)

    cdl, sdl, mdl = fixtures.olympic_cdl(), fixtures.olympic_sdl(), fixtures.olympic_mdl()
    (root / "cdl.xml").write_bytes(serialize(cdl))
    (root / "sdl.xml").write_bytes(serialize(sdl))
    (root / "mdl.xml").write_bytes(serialize(mdl))
    fixtures.generate_olympic_data(args.seed, args.scale, root / "data")

    (root / "queries").mkdir(exist_ok=True)
    (root / "queries" / "weekend_sales.cql").write_text(fixtures.WEEKEND_SALES_QUERY + "\n", encoding="utf-8")
    manifest = f"""name = "olympic"

[models]
cdl = "cdl.xml"
sdl = "sdl.xml"
mdl = "mdl.xml"

[data]
dir = "data"

[fixture]
seed = {args.seed}
scale = {args.scale}

[golden]
weekend_sales = {{ query = "queries/weekend_sales.cql", expected = "golden/weekend_sales.csv" }}
"""
    (root / MANIFEST_NAME).write_text(manifest, encoding="utf-8")

    # The golden answer comes from the brute-force oracle, not the engine.
    try:
        models = load_models(root)
        store = load_store(models)
        query = parse_cql(fixtures.WEEKEND_SALES_QUERY, models.cdl)
        golden = oracle_execute(query, models.cdl, models.sdl, models.mdl, store)
    except (WorkspaceError, LoadError, QueryError) as exc:
        return _fail(f"demo generation failed: {exc}", ENVIRONMENT)
    (root / "golden").mkdir(exist_ok=True)
    (root / "golden" / "weekend_sales.csv").write_bytes(relation_to_csv(golden).encode("utf-8"))
    print(f"olympic workspace written to {root}", file=sys.stderr)
    return OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cim", description="Conceptual model compiler and query engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate the workspace's CDL/SDL/MDL models")
    p.add_argument("workspace")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("compile", help="compile mapping fragments into view definitions")
    p.add_argument("workspace")
    p.add_argument("--emit", metavar="PATH", help="write the view-set JSON document here instead of stdout")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("query", help="run an aggregation query")
    p.add_argument("workspace")
    p.add_argument("query")
    p.add_argument("--format", choices=("table", "csv", "json"), default="table")
    p.add_argument("--oracle", action="store_true", help="answer via the brute-force reference path")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("check", help="run exclusivity, cardinality, FK, and summarizability checks")
    p.add_argument("workspace")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("serve", help="serve the HTTP API for the workspace")
    p.add_argument("workspace")
    p.add_argument("--port", type=int, default=8787)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--materialize", action="store_true", help="snapshot the views at load instead of evaluating on demand")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("init-demo", help="write the Olympic demo workspace")
    p.add_argument("directory")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--scale", type=int, default=500)
    p.set_defaults(func=cmd_init_demo)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
