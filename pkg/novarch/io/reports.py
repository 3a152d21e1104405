"""
Reports - The RunReport emitted by every CLI subcommand.
"""

import hashlib
import json
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field
from rich.table import Table


def input_hash(text: Optional[str]) -> str:
    """sha256 of the raw input text ("" when there is no input)."""
    data = (text or "").encode("utf-8")
    return hashlib.sha256(data).hexdigest()


class RunReport(BaseModel):
    """Machine-readable outcome of one run; deterministic apart from `timing`."""
    command: List[str] = Field(description="Subcommand name followed by its arguments")
    input_hash: str = Field(description="sha256 of the input document")
    results: Dict[str, Any] = Field(default_factory=dict)
    checks: Dict[str, bool] = Field(default_factory=dict, description="Every invariant tested, pass or fail")
    error: Optional[Dict[str, Any]] = None
    exit_code: int = 0
    timing: Dict[str, float] = Field(default_factory=dict, description="Wall-clock seconds per stage")

    @property
    def ok(self) -> bool:
        return self.error is None and all(self.checks.values())

    def failed_checks(self) -> List[str]:
        return [name for name, passed in self.checks.items() if not passed]

    def deterministic_dump(self) -> Dict[str, Any]:
        """Everything but timing; equal across runs with equal inputs."""
        return self.model_dump(exclude={"timing"})

    def to_json(self) -> str:
        return json.dumps(self.model_dump(), indent=2, sort_keys=True, default=str)

    def to_table(self) -> Table:
        table = Table(title=" ".join(self.command), show_lines=False)
        table.add_column("key")
        table.add_column("value")
        for key, value in _flatten(self.results):
            table.add_row(key, value)
        for name, passed in self.checks.items():
            table.add_row(f"check:{name}", "pass" if passed else "FAIL")
        if self.error:
            table.add_row("error", f"{self.error.get('error')}: {self.error.get('message')}")
        return table


def _flatten(data: Any, prefix: str = "") -> List:
    rows = []
    if isinstance(data, dict):
        for k, v in data.items():
            rows.extend(_flatten(v, f"{prefix}.{k}" if prefix else str(k)))
    elif isinstance(data, list) and data and all(isinstance(x, (dict, list)) for x in data):
        for n, v in enumerate(data):
            rows.extend(_flatten(v, f"{prefix}[{n}]"))
    else:
        rows.append((prefix, json.dumps(data, default=str) if not isinstance(data, str) else data))
    return rows
