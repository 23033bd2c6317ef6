"""Run manifests: every CLI output directory records what produced it."""

from __future__ import annotations

import hashlib
import json
import os

from . import __version__
from .errors import ConfigError

MANIFEST_NAME = "manifest.json"


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir, subcommand: str, snapshot: dict, inputs=(), outputs=()):
    """Snapshot the resolved configuration plus input/output digests."""
    os.makedirs(out_dir, exist_ok=True)
    doc = {
        "tool": "gcnetlab",
        "version": __version__,
        "subcommand": subcommand,
        "snapshot": snapshot,
        "inputs": {str(p): sha256_file(p) for p in inputs},
        "outputs": {
            os.path.basename(str(p)): sha256_file(p) for p in outputs if os.path.exists(p)
        },
    }
    path = os.path.join(out_dir, MANIFEST_NAME)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return path


def read_manifest(path):
    if os.path.isdir(path):
        path = os.path.join(path, MANIFEST_NAME)
    with open(path) as fh:
        doc = json.load(fh)
    for key in ("subcommand", "snapshot"):
        if key not in doc:
            raise ConfigError(f"manifest missing {key!r}")
    return doc
