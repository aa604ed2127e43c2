"""Run manifests: enough recorded state to re-run a command bit-exactly."""

import hashlib
import json

TOOL_VERSION = "0.1.0"


def file_sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(path, command, argv, config, inputs, outputs, extra=None):
    """Write a deterministic manifest (no wall-clock content)."""
    manifest = {
        "tool_version": TOOL_VERSION,
        "command": command,
        "argv": list(argv),
        "config": config,
        "inputs": {str(p): file_sha256(p) for p in inputs},
        "outputs": [str(p) for p in outputs],
    }
    if extra:
        manifest["extra"] = extra
    with open(path, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True, ensure_ascii=False)
        f.write("\n")
    return manifest


def read_manifest(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)
