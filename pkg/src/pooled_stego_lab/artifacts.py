# ======================================================================= #
#  Copyright (C) 2026 pooled-stego-lab contributors                       #
#                                                                         #
#  This file may be distributed under the terms of the GNU GPLv3 license  #
# ======================================================================= #

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping

from .errors import ConfigFileError


def json_text(payload: Dict[str, Any]) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def csv_text(rows: Iterable[Dict[str, Any]], fieldnames: List[str]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row.get(k, "") for k in fieldnames})
    return buffer.getvalue()


def write_files_atomic(files: Mapping[Path, str]) -> None:
    """
    Stage every file in a sibling temp file, then move them all into place.
    If staging fails, no target is touched and the temp files are removed.
    """
    staged = []
    try:
        for path, text in files.items():
            if not path:
                raise ValueError("No output file specified")
            path = Path(path)
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(path.suffix + ".tmp")
            staged.append((tmp, path))
            with open(tmp, "w", encoding="utf-8", newline="") as file:
                file.write(text)
    except BaseException:
        for tmp, _ in staged:
            tmp.unlink(missing_ok=True)
        raise
    for tmp, path in staged:
        tmp.replace(path)


def write_text_atomic(path: Path, text: str) -> None:
    """Write through a sibling temp file so readers never see partial output"""
    write_files_atomic({path: text})


def write_json_atomic(path: Path, payload: Dict[str, Any]) -> None:
    write_text_atomic(path, json_text(payload))


def write_csv_atomic(
    path: Path, rows: Iterable[Dict[str, Any]], fieldnames: List[str]
) -> None:
    write_text_atomic(path, csv_text(rows, fieldnames))


def read_json(path: Path) -> Dict[str, Any]:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as file:
            data = json.load(file)
    except OSError as e:
        raise ConfigFileError(path, e.strerror or str(e)) from e
    except json.JSONDecodeError as e:
        raise ConfigFileError(path, f"line {e.lineno}: {e.msg}") from e
    if not isinstance(data, dict):
        raise ConfigFileError(path, "top level must be a JSON object")
    return data
