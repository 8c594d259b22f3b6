"""Locating, loading and verifying fixture directories.

A fixture set is a directory holding ``hv.csv`` and ``theta_k{K}.csv`` for
K = 0..N-1, optionally with ``checksums.json`` (sha256 per file).
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

from .errors import IncompleteFixtureError, ValidationError
from .tables import CountTable, parse_count_table

ENV_ROOT = "GHZLAB_FIXTURES"
BUNDLED = Path(__file__).resolve().parent / "fixtures"


def fixture_root() -> Path:
    env = os.environ.get(ENV_ROOT)
    return Path(env) if env else BUNDLED


def bundled_names() -> list[str]:
    root = fixture_root()
    return sorted(p.name for p in root.iterdir() if (p / "hv.csv").exists()) if root.is_dir() else []


def resolve_fixture_dir(arg) -> Path:
    """Accept a real directory, a name under the fixture root, or a unique prefix of one.

    ``fixtures/n6`` and ``n6`` both resolve to ``n6_0.57W`` in the bundled set.
    """
    path = Path(arg)
    if path.is_dir():
        return path
    name = path.name if path.parent.name in ("fixtures", "") else None
    if name is None:
        raise ValidationError(f"fixture directory {arg} not found")
    root = fixture_root()
    if (root / name).is_dir():
        return root / name
    matches = [n for n in bundled_names() if n.startswith(name + "_")]
    if len(matches) == 1:
        return root / matches[0]
    if matches:
        raise ValidationError(f"fixture name {name!r} is ambiguous: {', '.join(matches)}")
    raise ValidationError(f"fixture directory {arg} not found (root {root})")


def load_fixture_set(directory, n: int | None = None) -> tuple[CountTable, list[CountTable]]:
    d = resolve_fixture_dir(directory)
    if not (d / "hv.csv").exists():
        raise IncompleteFixtureError(f"{d}: missing hv.csv", missing=("hv",))
    hv = parse_count_table(d / "hv.csv", n)
    n = hv.n_photons
    missing = [k for k in range(n) if not (d / f"theta_k{k}.csv").exists()]
    if missing:
        ks = ", ".join(f"k={k}" for k in missing)
        raise IncompleteFixtureError(f"{d}: missing angle tables {ks}", missing=missing)
    return hv, [parse_count_table(d / f"theta_k{k}.csv", n) for k in range(n)]


def sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_checksums(directory) -> dict[str, str]:
    d = Path(directory)
    sums = {p.name: sha256(p) for p in sorted(d.iterdir())
            if p.is_file() and p.name != "checksums.json"}
    (d / "checksums.json").write_bytes((json.dumps(sums, indent=2) + "\n").encode("utf-8"))
    return sums


def verify_checksums(directory) -> list[str]:
    """Return a list of problems; empty means every recorded file matches."""
    d = resolve_fixture_dir(directory)
    record = d / "checksums.json"
    if not record.exists():
        return [f"{d}: no checksums.json"]
    expected = json.loads(record.read_text(encoding="utf-8"))
    problems = []
    for name, digest in sorted(expected.items()):
        p = d / name
        if not p.exists():
            problems.append(f"{name}: missing")
        elif sha256(p) != digest:
            problems.append(f"{name}: checksum mismatch")
    return problems
