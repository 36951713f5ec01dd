# Copyright 2025 Dragos Crintea - HikariLabs LTD
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#       http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Run manifest: what a run produced, from which config, and how long it took."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Union

import yaml

from latentdoor.__version__ import __version__
from latentdoor.errors import FormatError, MissingArtifactError
from latentdoor.fileio import PathLike, atomic_write_text, read_text

MANIFEST_FORMAT = "latentdoor/run-manifest"
MANIFEST_VERSION = "1"
MANIFEST_NAME = "manifest.yaml"


@dataclass
class RunManifest:
    """Artifacts are keyed by name and stored relative to the run directory."""

    config_hash: str
    tool_version: str = __version__
    artifacts: dict[str, str] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)

    def add(self, name: str, path: PathLike, run_dir: PathLike) -> None:
        self.artifacts[name] = Path(path).relative_to(Path(run_dir)).as_posix()

    def missing(self, run_dir: PathLike) -> list[str]:
        """Artifact paths that do not exist under ``run_dir``."""
        return sorted(p for p in self.artifacts.values() if not (Path(run_dir) / p).exists())

    def to_dict(self) -> dict[str, Any]:
        return {
            "format": MANIFEST_FORMAT,
            "version": MANIFEST_VERSION,
            "config_hash": self.config_hash,
            "tool_version": self.tool_version,
            "artifacts": dict(sorted(self.artifacts.items())),
            "timings": {k: round(float(v), 3) for k, v in self.timings.items()},
        }

    @classmethod
    def from_dict(cls, document: Any) -> "RunManifest":
        if not isinstance(document, dict) or document.get("format") != MANIFEST_FORMAT:
            raise FormatError(
                f"Not a latentdoor run manifest: expected format={MANIFEST_FORMAT!r}"
            )
        if not isinstance(document.get("artifacts", {}), dict):
            raise FormatError("Run manifest has no 'artifacts' mapping")
        return cls(
            config_hash=str(document.get("config_hash", "")),
            tool_version=str(document.get("tool_version", "")),
            artifacts={str(k): str(v) for k, v in document.get("artifacts", {}).items()},
            timings={str(k): float(v) for k, v in (document.get("timings") or {}).items()},
        )


def save_manifest(manifest: RunManifest, run_dir: PathLike) -> Path:
    """Writes ``manifest.yaml`` after checking every listed artifact exists.

    Raises:
        MissingArtifactError: If a listed artifact is absent.
    """
    missing = manifest.missing(run_dir)
    if missing:
        raise MissingArtifactError(f"Manifest lists missing artifacts: {', '.join(missing)}")
    path = Path(run_dir) / MANIFEST_NAME
    atomic_write_text(
        path,
        yaml.safe_dump(manifest.to_dict(), sort_keys=False, allow_unicode=True, width=88),
    )
    return path


def load_manifest(source: Union[PathLike, dict[str, Any]]) -> RunManifest:
    """Loads a manifest from a run directory, a file path or a parsed mapping."""
    if isinstance(source, dict):
        return RunManifest.from_dict(source)
    path = Path(source)
    if path.is_dir():
        path = path / MANIFEST_NAME
    return RunManifest.from_dict(yaml.safe_load(read_text(path, "run manifest")))
