"""Plain-text curve files: one vertex per line, comma or whitespace separated, ``#`` comments."""

from __future__ import annotations

import re
from pathlib import Path
from typing import Iterable, TextIO, Union

import numpy as np

from .geometry import Chain

_SPLIT = re.compile(r"[,\s]+")


class CurveFormatError(ValueError):
    """Malformed curve file; the message names the offending line."""


def parse_curve(lines: Iterable[str], source: str = "<curve>") -> Chain:
    rows: list[list[float]] = []
    dim = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = [f for f in _SPLIT.split(line) if f]
        try:
            row = [float(f) for f in fields]
        except ValueError:
            raise CurveFormatError(f"{source}:{lineno}: not a list of numbers: {line!r}") from None
        if not all(np.isfinite(row)):
            raise CurveFormatError(f"{source}:{lineno}: non-finite coordinate")
        if dim is None:
            dim = len(row)
        elif len(row) != dim:
            raise CurveFormatError(f"{source}:{lineno}: expected {dim} coordinates, found {len(row)}")
        rows.append(row)
    if not rows:
        raise CurveFormatError(f"{source}: no vertices")
    return Chain(rows)


def read_curve(path: Union[str, Path]) -> Chain:
    path = Path(path)
    with path.open() as fh:
        return parse_curve(fh, str(path))


def format_curve(chain: Chain) -> str:
    return "".join(" ".join(f"{x:.17g}" for x in row) + "\n" for row in chain.vertices)


def write_curve(chain: Chain, out: Union[str, Path, TextIO]) -> None:
    text = format_curve(chain)
    if isinstance(out, (str, Path)):
        Path(out).write_text(text)
    else:
        out.write(text)
