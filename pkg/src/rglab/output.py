"""Deterministic CSV / JSON writers and run manifests."""

import csv
import datetime
import hashlib
import json
import math
from pathlib import Path

__all__ = ["format_float", "sha256_file", "write_csv", "write_json", "write_manifest"]


def format_float(x):
    """17 significant digits: round-trips every 64-bit float exactly."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def _cell(value):
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format_float(value)
    if hasattr(value, "dtype"):
        return _cell(value.item())
    return str(value)


def write_csv(path, header, rows):
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    return path


def _jsonable(obj):
    if hasattr(obj, "tolist"):
        return obj.tolist()
    if hasattr(obj, "item"):
        return obj.item()
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def dumps(obj):
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False, default=_jsonable) + "\n"


def write_json(path, obj):
    path = Path(path)
    path.write_text(dumps(obj), encoding="utf-8")
    return path


def sha256_file(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def write_manifest(out_dir, config_echo, outputs, runtime_seconds, version):
    """manifest.json with sha256 checksums of ``outputs`` (paths inside ``out_dir``)."""
    out_dir = Path(out_dir)
    manifest = {
        "artifact": "rglab",
        "version": version,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
        "config": config_echo,
        "checksums": {Path(p).name: sha256_file(p) for p in outputs},
        "runtime_seconds": round(runtime_seconds, 3),
    }
    return write_json(out_dir / "manifest.json", manifest)
