"""Set files: first line a group spec, then one canonical encoding per line."""

from __future__ import annotations

import os

from .errors import GroupSpecError
from .groups import build_group
from .sets import MultSet


def read_set(path: str | os.PathLike) -> MultSet:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise GroupSpecError(f"{path}: empty set file")
    oracle = build_group(lines[0])
    return MultSet(oracle, (oracle.kdecode(ln) for ln in lines[1:]))


def write_set(path: str | os.PathLike, x: MultSet) -> None:
    spec = x.oracle.domain
    if "/" in spec:
        raise GroupSpecError(
            f"group {spec!r} is a derived quotient and has no buildable spec"
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(spec + "\n")
        for text in x.encoded():
            fh.write(text + "\n")
