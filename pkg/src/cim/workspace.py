"""Workspace loading: a directory with a manifest, model files, and CSVs.

The manifest (``cim.toml``) names the three model documents and the
data directory; the file system is the unit of configuration.  Loading
proceeds in stages (read and parse, validate, ingest CSVs, compile) so
the CLI can map each failure class to its exit-code contract.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import tomli

from .compiler import CompileResult, compile_views
from .graph import build_graph
from .model import CdlModel, Diagnostic, MdlModel, SdlModel, errors_in
from .storage import LoadError, Store
from .validation import validate_cdl, validate_mdl, validate_sdl
from .xmlio import DocumentKind, XmlDocumentError, parse

MANIFEST_NAME = "cim.toml"


class WorkspaceError(Exception):
    """Environment-level failure: missing files, bad XML, bad CSV."""


@dataclass
class GoldenQuery:
    query_path: Path
    expected_path: Path


@dataclass
class Manifest:
    root: Path
    name: str
    cdl_path: Path
    sdl_path: Path
    mdl_path: Path
    data_dir: Path
    seed: int | None = None
    scale: int | None = None
    goldens: dict[str, GoldenQuery] = field(default_factory=dict)


def read_manifest(root: Path) -> Manifest:
    root = Path(root)
    manifest_path = root / MANIFEST_NAME
    if not manifest_path.is_file():
        raise WorkspaceError(f"no {MANIFEST_NAME} in {root}")
    try:
        raw = tomli.loads(manifest_path.read_text(encoding="utf-8"))
    except tomli.TOMLDecodeError as exc:
        raise WorkspaceError(f"{manifest_path}: {exc}") from exc
    models = raw.get("models", {})
    for key in ("cdl", "sdl", "mdl"):
        if key not in models:
            raise WorkspaceError(f"{manifest_path}: [models] must name {key!r}")
    goldens = {}
    for name, entry in raw.get("golden", {}).items():
        goldens[name] = GoldenQuery(
            query_path=root / entry["query"], expected_path=root / entry["expected"]
        )
    fixture = raw.get("fixture", {})
    return Manifest(
        root=root,
        name=raw.get("name", root.name),
        cdl_path=root / models["cdl"],
        sdl_path=root / models["sdl"],
        mdl_path=root / models["mdl"],
        data_dir=root / raw.get("data", {}).get("dir", "data"),
        seed=fixture.get("seed"),
        scale=fixture.get("scale"),
        goldens=goldens,
    )


def _parse_file(kind: DocumentKind, path: Path, strict: bool):
    if not path.is_file():
        raise WorkspaceError(f"model file not found: {path}")
    try:
        return parse(kind, path.read_bytes(), strict=strict)
    except XmlDocumentError as exc:
        raise WorkspaceError(f"{path}: {exc}") from exc


@dataclass
class ModelSet:
    manifest: Manifest
    cdl: CdlModel
    sdl: SdlModel
    mdl: MdlModel

    def validate(self) -> list[Diagnostic]:
        diagnostics = validate_cdl(self.cdl) + validate_sdl(self.sdl)
        if not errors_in(diagnostics):
            diagnostics += validate_mdl(self.cdl, self.sdl, self.mdl)
        return diagnostics


def load_models(root: Path, strict: bool = True) -> ModelSet:
    manifest = read_manifest(root)
    return ModelSet(
        manifest=manifest,
        cdl=_parse_file(DocumentKind.CDL, manifest.cdl_path, strict),
        sdl=_parse_file(DocumentKind.SDL, manifest.sdl_path, strict),
        mdl=_parse_file(DocumentKind.MDL, manifest.mdl_path, strict),
    )


def load_store(models: ModelSet) -> Store:
    """Ingest every declared table's CSV and freeze the store."""
    data_dir = models.manifest.data_dir
    if not data_dir.is_dir():
        raise WorkspaceError(f"data directory not found: {data_dir}")
    store = Store()
    for table in models.sdl.tables:
        path = data_dir / f"{table.name}.csv"
        if not path.is_file():
            raise WorkspaceError(f"no CSV for table {table.name!r}: {path}")
        try:
            store.load_table(table, path.read_bytes())
        except LoadError as exc:
            raise WorkspaceError(f"{path}: {exc}") from exc
    store.freeze()
    return store


@dataclass
class LoadedWorkspace:
    """Everything a query run needs, compiled and frozen."""

    models: ModelSet
    diagnostics: list[Diagnostic]
    store: Store
    compiled: CompileResult

    @property
    def cdl(self) -> CdlModel:
        return self.models.cdl

    @property
    def sdl(self) -> SdlModel:
        return self.models.sdl

    @property
    def mdl(self) -> MdlModel:
        return self.models.mdl

    @property
    def clean(self) -> bool:
        return not errors_in(self.diagnostics) and self.compiled.ok

    def graph(self) -> dict:
        return build_graph(self.cdl, self.sdl, self.mdl)


def load_workspace(root: Path, strict: bool = True) -> LoadedWorkspace:
    """Run the full pipeline; validation/compile diagnostics do not raise."""
    models = load_models(root, strict=strict)
    diagnostics = models.validate()
    if errors_in(diagnostics):
        raise WorkspaceError(
            "model validation failed:\n" + "\n".join(str(d) for d in errors_in(diagnostics))
        )
    store = load_store(models)
    compiled = compile_views(models.cdl, models.sdl, models.mdl)
    return LoadedWorkspace(models=models, diagnostics=diagnostics, store=store, compiled=compiled)
