"""Run manifests: what produced an output, from what, with which flags.

A manifest lands next to each primary output as ``<output>.manifest.json``.
Two identical runs differ only in the ``created_at`` field.
"""

from __future__ import annotations

import hashlib
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

TOOL_NAME = "bitext-sieve"

from . import __version__

MANIFEST_SUFFIX = ".manifest.json"


def file_digest(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return "sha256:" + digest.hexdigest()


def write_manifest(
    primary_output: str | Path,
    subcommand: str,
    argv: list[str],
    inputs: list[str | Path],
    outputs: list[str | Path],
    seed: int | None = None,
) -> Path:
    doc = {
        "tool": TOOL_NAME,
        "version": __version__,
        "python": sys.version.split()[0],
        "subcommand": subcommand,
        "argv": list(argv),
        "seed": seed,
        "inputs": {str(p): file_digest(p) for p in inputs},
        "outputs": {str(p): file_digest(p) for p in outputs},
        "created_at": datetime.now(timezone.utc).isoformat(),
    }
    path = Path(str(primary_output) + MANIFEST_SUFFIX)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(doc, fh, ensure_ascii=False, sort_keys=True, indent=2)
        fh.write("\n")
    return path
