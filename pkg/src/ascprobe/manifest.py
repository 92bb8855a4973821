"""Run-level provenance records.

Each pipeline stage appends its effective configuration and the sha256 of
every artifact it wrote to manifest.json at the run-directory root. The
stage configs stored here are complete, so a manifest is enough to re-run
the pipeline and reproduce the artifacts byte for byte.
"""

from __future__ import annotations

import json
import time
from pathlib import Path

from . import __version__
from .container import file_sha256

MANIFEST_NAME = "manifest.json"
STAGE_ORDER = ("generate", "train", "analyze")


def _utc_now() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())


def manifest_path(run_dir: str | Path) -> Path:
    return Path(run_dir) / MANIFEST_NAME


def load_manifest(run_dir: str | Path) -> dict:
    path = manifest_path(run_dir)
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _empty_manifest() -> dict:
    return {
        "tool": "ascprobe",
        "version": __version__,
        "created": _utc_now(),
        "updated": _utc_now(),
        "stages": {},
    }


def record_stage(
    run_dir: str | Path,
    stage: str,
    config: dict,
    artifacts: list[str],
) -> dict:
    """Merge one stage's effective config and artifact hashes into the manifest.

    artifacts are paths relative to run_dir; each is hashed as found on disk.
    """
    if stage not in STAGE_ORDER:
        raise ValueError(f"unknown stage {stage!r}")
    run_dir = Path(run_dir)
    path = manifest_path(run_dir)
    manifest = load_manifest(run_dir) if path.exists() else _empty_manifest()
    manifest["updated"] = _utc_now()
    manifest["stages"][stage] = {
        "config": config,
        "completed": _utc_now(),
        "artifacts": {rel: file_sha256(run_dir / rel) for rel in sorted(artifacts)},
    }
    tmp = path.with_suffix(".json.tmp")
    tmp.write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    tmp.replace(path)
    return manifest


def verify_artifacts(run_dir: str | Path, manifest: dict | None = None) -> list[str]:
    """Relative paths whose on-disk hash no longer matches the manifest."""
    run_dir = Path(run_dir)
    if manifest is None:
        manifest = load_manifest(run_dir)
    bad = []
    for stage in STAGE_ORDER:
        entry = manifest["stages"].get(stage)
        if entry is None:
            continue
        for rel, digest in entry["artifacts"].items():
            target = run_dir / rel
            if not target.exists() or file_sha256(target) != digest:
                bad.append(rel)
    return bad
