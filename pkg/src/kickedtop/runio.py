"""Atomic CSV output and the per-directory run manifest.

Floats are written with repr(), the shortest decimal that round-trips, so
re-parsing a CSV reproduces the exact binary values. Files are written to a
temporary name and renamed into place, so readers and concurrent jobs never
observe partial data.
"""

from __future__ import annotations

import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)

RNG_ALGORITHM = "philox4x64"


def format_value(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(float(x))  # plain float repr even for numpy scalars
    if x is None:
        return ""
    if isinstance(x, (int, np.integer, str)):
        return str(x)
    return repr(float(x))


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    lines = [",".join(header)]
    lines.extend(",".join(format_value(v) for v in row) for row in rows)
    atomic_write_text(path, "\n".join(lines) + "\n")
    return path


def read_csv(path: str | Path) -> tuple[list[str], list[list[str]]]:
    text = Path(path).read_text()
    lines = [ln for ln in text.splitlines() if ln]
    if not lines:
        raise ValueError(f"{path}: empty CSV")
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:]]


class Manifest:
    """Journal of completed artifacts in an output directory.

    Each entry keys one unit of work ("poincare:g2.6", "overlap:g2.6:j152")
    to the hash of the parameters that determine its files, the file list,
    and the wall time spent. A unit whose hash matches and whose files all
    exist is skipped on re-run.
    """

    FILENAME = "manifest.json"

    def __init__(self, out_dir: str | Path, version: str):
        self.out_dir = Path(out_dir)
        self.path = self.out_dir / self.FILENAME
        self.data: dict = {"version": version, "rng": RNG_ALGORITHM, "entries": {}}
        if self.path.exists():
            try:
                previous = json.loads(self.path.read_text())
                if isinstance(previous.get("entries"), dict):
                    self.data["entries"] = previous["entries"]
            except (OSError, json.JSONDecodeError):
                logger.warning("ignoring unreadable manifest at %s", self.path)

    def is_complete(self, key: str, param_hash: str) -> bool:
        entry = self.data["entries"].get(key)
        if not entry or entry.get("hash") != param_hash:
            return False
        return all((self.out_dir / f).exists() for f in entry.get("files", []))

    def files_of(self, key: str) -> list[Path]:
        entry = self.data["entries"][key]
        return [self.out_dir / f for f in entry["files"]]

    def record(
        self, key: str, param_hash: str, files: Sequence[Path], seconds: float, **extra
    ) -> None:
        self.data["entries"][key] = {
            "hash": param_hash,
            "files": sorted(os.path.relpath(f, self.out_dir) for f in files),
            "seconds": round(seconds, 3),
            **extra,
        }

    def save(self) -> None:
        atomic_write_text(self.path, json.dumps(self.data, indent=1, sort_keys=True) + "\n")
