"""Atomic file output helpers.

Every artifact file is written to a temporary file in the target directory
and renamed into place, so an interrupted run never leaves a truncated
CSV or JSON file behind.
"""

from __future__ import annotations

import json
import os
import tempfile


def atomic_write_text(path, text: str) -> None:
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_json(path, payload) -> None:
    atomic_write_text(path, json.dumps(payload, indent=2) + "\n")


def format_csv(header, rows) -> str:
    """Comma-delimited text with a header row; floats use shortest round-trip repr."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def atomic_write_csv(path, header, rows) -> None:
    atomic_write_text(path, format_csv(header, rows))


def _cell(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        # float() strips numpy scalar wrappers so repr stays plain
        return repr(float(v))
    if hasattr(v, "item"):  # other numpy scalars
        return _cell(v.item())
    return str(v)
