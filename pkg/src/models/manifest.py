"""
Run manifest: everything needed to rerun a CLI command bit-exactly.
Stored as plain `key = value` lines; structured values are JSON.
"""

import json
from datetime import datetime
from typing import Dict, List, Optional

from pydantic import BaseModel, Field

TOOL_VERSION = "0.1.0"


def format_key_values(entries: Dict[str, object]) -> str:
    """Render a flat dict as `key = value` lines; non-strings become JSON."""
    lines = []
    for key, value in entries.items():
        text = value if isinstance(value, str) else json.dumps(value, sort_keys=True)
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"


def parse_key_values(text: str) -> Dict[str, str]:
    """Inverse of format_key_values; blank lines and '#' comments are skipped."""
    entries = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"Malformed manifest line: {raw!r}")
        key, value = line.split("=", 1)
        entries[key.strip()] = value.strip()
    return entries


class RunManifest(BaseModel):
    """Provenance of one CLI invocation."""
    command: str
    scenario: str = ""
    sampler: str = ""
    sampler_config: Dict = Field(default_factory=dict)
    chain_config: Dict = Field(default_factory=dict)
    n_chains: int = 0
    seeds: List[int] = Field(default_factory=list)
    outputs: List[str] = Field(default_factory=list)
    tool_version: str = TOOL_VERSION
    started_at: datetime = Field(default_factory=datetime.utcnow)
    finished_at: Optional[datetime] = None
    wall_seconds: float = 0.0
    extra: Dict[str, str] = Field(default_factory=dict)

    def to_text(self) -> str:
        entries = {
            "command": self.command,
            "scenario": self.scenario,
            "sampler": self.sampler,
            "sampler_config": self.sampler_config,
            "chain_config": self.chain_config,
            "n_chains": self.n_chains,
            "seeds": self.seeds,
            "outputs": self.outputs,
            "tool_version": self.tool_version,
            "started_at": self.started_at.isoformat(),
            "finished_at": self.finished_at.isoformat() if self.finished_at else "",
            "wall_seconds": self.wall_seconds,
        }
        for key, value in self.extra.items():
            entries[f"extra.{key}"] = value
        return format_key_values(entries)

    @classmethod
    def from_text(cls, text: str) -> "RunManifest":
        raw = parse_key_values(text)
        extra = {k[len("extra."):]: v for k, v in raw.items() if k.startswith("extra.")}
        return cls(
            command=raw["command"],
            scenario=raw.get("scenario", ""),
            sampler=raw.get("sampler", ""),
            sampler_config=json.loads(raw.get("sampler_config", "{}")),
            chain_config=json.loads(raw.get("chain_config", "{}")),
            n_chains=int(raw.get("n_chains", "0")),
            seeds=json.loads(raw.get("seeds", "[]")),
            outputs=json.loads(raw.get("outputs", "[]")),
            tool_version=raw.get("tool_version", TOOL_VERSION),
            started_at=datetime.fromisoformat(raw["started_at"]),
            finished_at=datetime.fromisoformat(raw["finished_at"]) if raw.get("finished_at") else None,
            wall_seconds=float(raw.get("wall_seconds", "0")),
            extra=extra,
        )
