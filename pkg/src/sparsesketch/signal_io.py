"""Signal file formats.

Text: one real per line, or ``re,im`` per line for complex signals. Blank
lines and ``#`` comments are ignored.

Binary: an 8-byte little-endian unsigned header holding n, followed by n
little-endian float64 values (or 2n interleaved re/im values for complex).
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import DomainError

_HEADER = struct.Struct("<Q")


def _is_binary(path: Path) -> bool:
    return path.suffix in (".bin", ".cbin")


def read_signal(path, complex_: bool | None = None) -> np.ndarray:
    path = Path(path)
    if _is_binary(path):
        raw = path.read_bytes()
        if len(raw) < _HEADER.size:
            raise DomainError(f"{path}: truncated header")
        (n,) = _HEADER.unpack_from(raw)
        body = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
        if complex_ is None:
            complex_ = path.suffix == ".cbin"
        want = 2 * n if complex_ else n
        if body.size != want:
            raise DomainError(f"{path}: header says n={n} but found {body.size} values")
        if complex_:
            return (body[0::2] + 1j * body[1::2]).astype(np.complex128)
        return body.astype(np.float64)

    values = []
    is_complex = False
    for lineno, line in enumerate(path.read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            if "," in line:
                re_, im_ = line.split(",")
                values.append(complex(float(re_), float(im_)))
                is_complex = True
            else:
                values.append(float(line))
        except ValueError as exc:
            raise DomainError(f"{path}:{lineno}: cannot parse {line!r}") from exc
    if complex_ or is_complex:
        return np.asarray(values, dtype=np.complex128)
    return np.asarray(values, dtype=np.float64)


def write_signal(path, x) -> None:
    path = Path(path)
    x = np.asarray(x)
    if _is_binary(path):
        if np.iscomplexobj(x):
            body = np.empty(2 * x.size, dtype="<f8")
            body[0::2], body[1::2] = x.real, x.imag
        else:
            body = x.astype("<f8")
        path.write_bytes(_HEADER.pack(x.size) + body.tobytes())
        return
    if np.iscomplexobj(x):
        lines = [f"{v.real!r},{v.imag!r}" for v in x.tolist()]
    else:
        lines = [repr(float(v)) for v in x.tolist()]
    path.write_text("\n".join(lines) + ("\n" if lines else ""))


def read_support(path) -> np.ndarray:
    """Whitespace- or comma-separated integer indices."""
    tokens = []
    for line in Path(path).read_text().splitlines():
        tokens += line.split("#", 1)[0].replace(",", " ").split()
    return np.unique(np.asarray([int(t) for t in tokens], dtype=np.int64))
