"""Channel files and report serialization.

A channel file is JSON::

    {"dim": 2,
     "letters": [{"label": "0", "matrix": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]},
                 ...]}

where ``matrix[r][c] = [re, im]``, row-major.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .channel import CQChannel, validate_channel
from .errors import CQCapError, ValidationError

TABLE_HEADER = ("n", "N", "delta", "trial", "seed", "p_err", "bound17", "bound18")


class ChannelFileError(ValidationError):
    """A channel file could not be parsed into valid signal states."""


def _matrix_from_pairs(raw, dim: int, where: str) -> np.ndarray:
    if not isinstance(raw, list) or len(raw) != dim:
        raise ChannelFileError(f"{where}: expected {dim} rows")
    out = np.zeros((dim, dim), dtype=complex)
    for r, row in enumerate(raw):
        if not isinstance(row, list) or len(row) != dim:
            raise ChannelFileError(f"{where}: row {r} must have {dim} entries")
        for c, entry in enumerate(row):
            if (not isinstance(entry, list) or len(entry) != 2
                    or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry)):
                raise ChannelFileError(f"{where}: entry [{r}][{c}] must be a [re, im] pair of numbers")
            out[r, c] = complex(entry[0], entry[1])
    return out


def channel_from_dict(data) -> CQChannel:
    if not isinstance(data, dict):
        raise ChannelFileError("top level must be an object with 'dim' and 'letters'")
    dim = data.get("dim")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ChannelFileError(f"field 'dim' must be a positive integer, got {dim!r}")
    letters = data.get("letters")
    if not isinstance(letters, list) or not letters:
        raise ChannelFileError("field 'letters' must be a non-empty list")
    states, labels = [], []
    for k, letter in enumerate(letters):
        if not isinstance(letter, dict) or "matrix" not in letter:
            raise ChannelFileError(f"letters[{k}]: must be an object with a 'matrix' field")
        label = str(letter.get("label", k))
        states.append(_matrix_from_pairs(letter["matrix"], dim, f"letters[{k}] ({label}).matrix"))
        labels.append(label)
    return validate_channel(states, labels)


def parse_channel_file(path) -> CQChannel:
    """Read and validate a channel file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ChannelFileError(f"{path}: cannot read ({exc.strerror})") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ChannelFileError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    try:
        return channel_from_dict(data)
    except ValidationError as exc:
        raise ChannelFileError(f"{path}: {exc}") from None


def channel_to_dict(channel: CQChannel) -> dict:
    return {
        "dim": channel.d,
        "letters": [
            {"label": lab,
             "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in s]}
            for lab, s in zip(channel.labels, channel.states)
        ],
    }


def write_channel_file(channel: CQChannel, path) -> None:
    atomic_write(path, json.dumps(channel_to_dict(channel), indent=1) + "\n")


def atomic_write(path, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file and rename; no partial files."""
    path = Path(path)
    tmp = None
    try:
        fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except OSError as exc:
        if tmp is not None and os.path.exists(tmp):
            os.unlink(tmp)
        raise CQCapError(f"cannot write {path}: {exc.strerror or exc}") from None


SIG_DIGITS = 9


def format_sig(x: float) -> str:
    """Nine significant digits, positional notation (``nan``/``inf`` spelled out)."""
    x = float(x)
    if not math.isfinite(x):
        return str(x)
    if x == 0.0:
        return f"{0.0:.{SIG_DIGITS - 1}f}"
    # decimal exponent after rounding, so 9.9999999996 becomes 10.0000000
    exp = int(f"{x:.{SIG_DIGITS - 1}e}".split("e")[1])
    return f"{x:.{max(SIG_DIGITS - 1 - exp, 0)}f}"


def to_structured(payload) -> str:
    data = payload.to_dict() if hasattr(payload, "to_dict") else payload
    return json.dumps(data, indent=2, sort_keys=True, allow_nan=True) + "\n"


def to_table(rows) -> str:
    """Render rows (dicts keyed by ``TABLE_HEADER``) as CSV."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TABLE_HEADER)
    for r in rows:
        writer.writerow([
            int(r["n"]), int(r["N"]), format_sig(r["delta"]), int(r["trial"]), int(r["seed"]),
            format_sig(r["p_err"]), format_sig(r["bound17"]), format_sig(r["bound18"]),
        ])
    return buf.getvalue()


def report_rows(report) -> list[dict]:
    """Table rows of a :class:`~cqcap.experiment.SimulationReport`."""
    cfg = report.config
    return [
        {"n": cfg["n"], "N": cfg["N"], "delta": cfg["delta"], "trial": t.trial, "seed": t.seed,
         "p_err": t.p_err, "bound17": t.bound17, "bound18": report.bound18}
        for t in report.trials
    ]


def emit_report(report, fmt: str = "json", path=None) -> str:
    """Render ``report`` as ``json`` or ``csv`` and write it to ``path`` (if given).

    Returns the rendered text.  ``csv`` needs a report with per-trial rows.
    """
    if fmt == "json":
        text = to_structured(report)
    elif fmt == "csv":
        if not hasattr(report, "trials"):
            raise CQCapError(f"tabular output is not available for {type(report).__name__}")
        text = to_table(report_rows(report))
    else:
        raise CQCapError(f"unknown format {fmt!r}")
    if path is not None:
        atomic_write(path, text)
    return text


def read_table(text: str) -> list[dict]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != TABLE_HEADER:
        raise ValidationError(f"unexpected header {reader.fieldnames}")
    ints = {"n", "N", "trial", "seed"}
    return [{k: (int(v) if k in ints else float(v)) for k, v in row.items()} for row in reader]


def read_report(path) -> dict | list[dict]:
    """Parse a report written by :func:`emit_report` (format inferred from content)."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        return json.loads(text)
    return read_table(text)
