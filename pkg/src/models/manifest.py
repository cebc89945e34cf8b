"""
Run manifest.

Every CLI run writes `manifest.json` into its output directory before any
long-running work starts, and rewrites it when the run ends. Two runs with
identical manifests (single-threaded) produce byte-identical tensor outputs.
"""

from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field

MANIFEST_FILE = "manifest.json"


def _now() -> datetime:
    return datetime.now(timezone.utc)


class RunManifest(BaseModel):
    subcommand: str
    config: Dict[str, Any]
    seed: int
    seed_auto: bool = False              # True when no --seed was given and one was drawn
    threads: int = 1
    checkpoint_hash: Optional[str] = None
    outputs: List[str] = Field(default_factory=list)
    status: Literal["running", "ok", "failed"] = "running"
    error: Optional[str] = None
    started_at: datetime = Field(default_factory=_now)
    finished_at: Optional[datetime] = None

    def add_output(self, path: Path) -> Path:
        self.outputs.append(str(path))
        return path

    def finish(self, status: str = "ok", error: Optional[str] = None) -> "RunManifest":
        self.status = status
        self.error = error
        self.finished_at = _now()
        return self

    def write(self, out_dir: Path) -> Path:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / MANIFEST_FILE
        path.write_text(self.model_dump_json(indent=2))
        return path
