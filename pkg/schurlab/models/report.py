"""Experiment report records."""

from dataclasses import dataclass, field
from typing import Any

REPORT_SCHEMA = "schurlab.report/1"


@dataclass
class ExperimentReport:
    """Rows of one suite run plus its summary and config echo.

    Rows are dictionaries keyed by `columns`; `wall_time` is kept in memory
    only and never serialized, so identical configs give identical files.
    """

    suite: str
    columns: tuple[str, ...]
    rows: list[dict[str, Any]] = field(default_factory=list)
    summary: dict[str, Any] = field(default_factory=dict)
    config: dict[str, Any] = field(default_factory=dict)
    tool_version: str = ""
    schema: str = REPORT_SCHEMA
    wall_time: float = 0.0

    @property
    def violations(self) -> int:
        return int(self.summary.get("violations", 0))

    def add_row(self, **values: Any) -> None:
        missing = [c for c in self.columns if c not in values]
        if missing:
            raise KeyError(f"row is missing columns {missing}")
        self.rows.append({c: values[c] for c in self.columns})

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        return {
            "schema": self.schema,
            "suite": self.suite,
            "tool_version": self.tool_version,
            "config": self.config,
            "columns": list(self.columns),
            "rows": [dict(r) for r in self.rows],
            "summary": dict(self.summary),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentReport":
        """Create from dictionary."""
        columns = tuple(data.get("columns") or [])
        return cls(
            suite=data["suite"],
            columns=columns,
            rows=[dict(r) for r in data.get("rows") or []],
            summary=dict(data.get("summary") or {}),
            config=dict(data.get("config") or {}),
            tool_version=data.get("tool_version", ""),
            schema=data.get("schema", REPORT_SCHEMA),
        )
