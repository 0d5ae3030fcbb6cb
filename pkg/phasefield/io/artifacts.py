"""On-disk artifacts of a run: fields, meshes, curves, tables, JSON reports and a manifest."""

import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel

from .. import SCHEMA_VERSION, __version__
from ..analysis.density import DensityReport
from ..analysis.levelset import LevelSetCurves
from ..exceptions import ArtifactError, MeshMismatchError
from ..mesh.surface import SurfaceMesh, build_surface
from ..solver.energy import PhaseField
from ..solver.spectrum import SpectralSummary

logger = logging.getLogger(__name__)

MANIFEST = "manifest.json"
FLOAT_FORMAT = "%.17g"


class ArtifactStore:
    """Write and read the artifacts of one output directory."""

    def __init__(self, output_dir: Union[str, Path], config_hash: Optional[str] = None):
        """Initialize store.

        Args:
            output_dir: Directory holding the artifacts (created if missing)
            config_hash: Hash of the run configuration, recorded in every artifact
        """
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.config_hash = config_hash
        self.entries: Dict[str, Dict[str, Any]] = {}
        if (self.output_dir / MANIFEST).exists():
            self.entries = self.load_manifest().get("artifacts", {})

    def _record(self, name: str, path: Path, kind: str, **meta: Any) -> Path:
        self.entries[name] = {"path": path.name, "kind": kind, **meta}
        logger.debug(f"Wrote {kind} artifact {path}")
        return path

    def _entry(self, name: str, kind: str) -> Dict[str, Any]:
        entry = self.entries.get(name)
        if entry is None:
            raise ArtifactError(str(self.output_dir / name), "not listed in the manifest")
        if entry["kind"] != kind:
            raise ArtifactError(entry["path"], f"is a {entry['kind']}, not a {kind}")
        return entry

    def write_field(self, name: str, u: PhaseField) -> Path:
        """CSV with columns vertex_id, value."""
        path = self.output_dir / f"{name}.csv"
        frame = pd.DataFrame({"vertex_id": np.arange(u.values.size), "value": u.values})
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
        return self._record(name, path, "field", epsilon=u.epsilon, mesh_id=u.mesh_id)

    def read_field(self, name: str) -> PhaseField:
        entry = self._entry(name, "field")
        path = self.output_dir / entry["path"]
        frame = pd.read_csv(path, float_precision="round_trip")
        if list(frame.columns) != ["vertex_id", "value"]:
            raise ArtifactError(str(path), f"unexpected columns {list(frame.columns)}")
        values = frame.sort_values("vertex_id")["value"].to_numpy(dtype=float)
        return PhaseField(values=values, epsilon=float(entry["epsilon"]), mesh_id=entry["mesh_id"])

    def write_mesh(self, name: str, mesh: SurfaceMesh) -> Path:
        """Wavefront OBJ plus the recipe needed to rebuild the exact mesh."""
        path = self.output_dir / f"{name}.obj"
        path.write_text(mesh.to_obj())
        params = {k: v for k, v in mesh.params.items() if k != "resolution"}
        return self._record(
            name,
            path,
            "mesh",
            surface_kind=mesh.kind,
            resolution=int(mesh.params.get("resolution", 1)),
            params=params,
            mesh_id=mesh.mesh_id,
        )

    def read_mesh(self, name: str) -> SurfaceMesh:
        """Rebuild the mesh from its recipe and check it against the recorded id."""
        entry = self._entry(name, "mesh")
        mesh = build_surface(entry["surface_kind"], entry["resolution"], entry["params"])
        if mesh.mesh_id != entry["mesh_id"]:
            raise MeshMismatchError(entry["mesh_id"], mesh.mesh_id)
        return mesh

    def write_curves(self, name: str, curves: LevelSetCurves) -> Path:
        """CSV with columns curve_id, x, y, z."""
        path = self.output_dir / f"{name}.csv"
        curves.to_frame().to_csv(path, index=False, float_format=FLOAT_FORMAT)
        return self._record(
            name,
            path,
            "curves",
            level=curves.level,
            n_curves=curves.n_curves,
            total_length=curves.total_length,
        )

    def write_density(self, name: str, report: DensityReport) -> Path:
        """CSV with columns r, mass, ratio, monotonicity_ratio."""
        path = self.output_dir / f"{name}.csv"
        report.to_frame().to_csv(path, index=False, float_format=FLOAT_FORMAT)
        return self._record(
            name, path, "density", center=report.center, sigma=report.sigma, h0=report.h0
        )

    def write_spectrum(
        self, name: str, summary: SpectralSummary, eigenfields: bool = False
    ) -> Path:
        """JSON summary, with the eigenfields as CSV columns mode_0.. when requested."""
        path = self.write_json(name, summary.to_report(), kind="spectrum")
        if eigenfields:
            modes = self.output_dir / f"{name}_modes.csv"
            summary.eigenfield_frame().to_csv(modes, index=False, float_format=FLOAT_FORMAT)
            self._record(f"{name}_modes", modes, "eigenfields")
        return path

    def write_history(self, name: str, history: List[float]) -> Path:
        """CSV with columns iteration, max_energy."""
        path = self.output_dir / f"{name}.csv"
        frame = pd.DataFrame({"iteration": np.arange(len(history)), "max_energy": history})
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
        return self._record(name, path, "history", length=len(history))

    def write_table(self, name: str, frame: pd.DataFrame) -> Path:
        path = self.output_dir / f"{name}.csv"
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
        return self._record(name, path, "table", columns=list(frame.columns))

    def write_json(
        self, name: str, payload: Union[BaseModel, Dict[str, Any]], kind: str = "report"
    ) -> Path:
        """JSON document stamped with schema_version and the config hash."""
        if isinstance(payload, BaseModel):
            payload = payload.model_dump(mode="json")
        document = {
            "schema_version": SCHEMA_VERSION,
            "config_hash": self.config_hash,
            **payload,
        }
        path = self.output_dir / f"{name}.json"
        with open(path, "w") as f:
            json.dump(document, f, indent=2, sort_keys=True)
        return self._record(name, path, kind)

    def read_json(self, name: str) -> Dict[str, Any]:
        path = self.output_dir / f"{name}.json"
        if not path.exists():
            raise ArtifactError(str(path), "does not exist")
        with open(path, "r") as f:
            document = json.load(f)
        version = document.get("schema_version")
        if version != SCHEMA_VERSION:
            raise ArtifactError(str(path), f"schema version {version}, expected {SCHEMA_VERSION}")
        return document

    def save_manifest(self, metadata: Optional[Dict[str, Any]] = None) -> Path:
        """Write manifest.json listing every artifact.

        Args:
            metadata: Extra top-level fields

        Returns:
            Manifest path
        """
        manifest = {
            "schema_version": SCHEMA_VERSION,
            "package_version": __version__,
            "config_hash": self.config_hash,
            "artifacts": self.entries,
        }
        if metadata:
            manifest.update(metadata)
        manifest["created_at"] = datetime.now(timezone.utc).isoformat()

        path = self.output_dir / MANIFEST
        with open(path, "w") as f:
            json.dump(manifest, f, indent=2, sort_keys=True)
        logger.info(f"Manifest with {len(self.entries)} artifacts saved to {path}")
        return path

    def load_manifest(self) -> Dict[str, Any]:
        path = self.output_dir / MANIFEST
        if not path.exists():
            raise ArtifactError(str(path), "does not exist")
        with open(path, "r") as f:
            manifest = json.load(f)
        if manifest.get("schema_version") != SCHEMA_VERSION:
            raise ArtifactError(str(path), f"schema version {manifest.get('schema_version')}")
        return manifest
