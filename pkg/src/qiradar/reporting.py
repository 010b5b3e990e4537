"""Run manifests and delimited output helpers.

Every CLI output file is paired with a ``<output>.manifest.json`` recording the
exact argument vector, the resolved scenario, seed, worker count, and tool
version: enough to regenerate the outputs bit-identically (Monte Carlo
included, since the streams are keyed by seed and trial block only).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

SCHEMA_VERSION = "1"


def fmt(value) -> str:
    """Stable scalar formatting for CSV cells."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int,)) and not isinstance(value, bool):
        return str(value)
    return f"{float(value):.12g}"


def write_csv(path: str | Path, header: str, rows) -> None:
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) if not isinstance(v, str) else v for v in row) + "\n")


@dataclass
class RunManifest:
    command: str
    argv: list[str]
    scenario: dict
    seed: Optional[int]
    workers: int
    budget: Optional[int]
    outputs: list[str]
    extras: dict = field(default_factory=dict)
    tool: str = "qiradar"
    version: str = "0.1.0"
    schema_version: str = SCHEMA_VERSION
    created: str = ""

    def write(self, path: str | Path) -> Path:
        if not self.created:
            self.created = datetime.now(timezone.utc).isoformat()
        payload = asdict(self)
        Path(path).write_text(json.dumps(payload, indent=2, default=str) + "\n")
        return Path(path)

    @classmethod
    def load(cls, path: str | Path) -> "RunManifest":
        data = json.loads(Path(path).read_text())
        return cls(**data)


def manifest_path(output: str | Path) -> Path:
    output = Path(output)
    return output.with_name(output.stem + ".manifest.json")
