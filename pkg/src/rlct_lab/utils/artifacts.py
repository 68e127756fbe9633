"""Report and plot-data files written under the artifacts directory."""

from __future__ import annotations

import os
import re
from pathlib import Path

from ..errors import ConfigError

_UNSAFE = re.compile(r"[^A-Za-z0-9._-]+")


def artifact_path(output_dir: Path, category: str, stem: str, suffix: str) -> Path:
    """``output_dir/category/stem.suffix`` with runs of unsafe characters folded to ``_``."""

    clean = _UNSAFE.sub("_", stem).strip("_.") or category
    return output_dir / category / f"{clean}.{suffix}"


def write_artifact(output_dir: Path, category: str, stem: str, content: str, suffix: str) -> Path:
    """Write ``content`` atomically; the same inputs always land on the same file."""

    path = artifact_path(output_dir, category, stem, suffix)
    temporary = path.with_name(path.name + ".tmp")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        temporary.write_text(content, encoding="utf-8")
        os.replace(temporary, path)
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from exc
    return path
