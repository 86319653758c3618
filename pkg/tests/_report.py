"""Collects one summary line per acceptance criterion for the terminal report."""

from __future__ import annotations

LINES: dict[str, str] = {}


def record(key: str, passed: bool, detail: str) -> str:
    line = f"criterion {key}: {'PASS' if passed else 'FAIL'} ({detail})"
    LINES[key] = line
    print(line)
    return line
