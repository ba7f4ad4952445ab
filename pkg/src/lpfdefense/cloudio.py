"""Reading and writing point clouds: XYZ, ASCII PLY, OFF and PCLB.

PCLB is the binary interchange format: the 4-byte magic ``PCLB``, a
little-endian uint32 point count, then ``count * 3`` little-endian float32
coordinates.
"""
import enum
import os
import struct
from pathlib import Path

import numpy as np

from .cloud import PointCloud
from .errors import CloudIOError, EmptyCloud, ParseError

PCLB_MAGIC = b"PCLB"
_PCLB_HEADER = struct.Struct("<4sI")


class CloudFormat(str, enum.Enum):
    XYZ = "xyz"
    PLY_ASCII = "ply"
    OFF = "off"
    PCLB = "pclb"


SUFFIXES = {
    ".xyz": CloudFormat.XYZ,
    ".txt": CloudFormat.XYZ,
    ".ply": CloudFormat.PLY_ASCII,
    ".off": CloudFormat.OFF,
    ".pclb": CloudFormat.PCLB,
}


def format_for_path(path):
    try:
        return SUFFIXES[Path(path).suffix.lower()]
    except KeyError:
        raise CloudIOError(f"cannot infer point-cloud format from {path!s}") from None


def _coerce_format(fmt, path):
    if fmt is None:
        return format_for_path(path)
    if isinstance(fmt, CloudFormat):
        return fmt
    key = str(fmt).lower()
    for f in CloudFormat:
        if key in (f.value, f.name.lower()):
            return f
    raise ValueError(f"unknown point-cloud format {fmt!r}")


def _floats(tokens, path, lineno):
    try:
        # float() ignores the process locale
        return [float(t) for t in tokens]
    except ValueError:
        raise ParseError(f"bad number in {' '.join(tokens)!r}", path, lineno) from None


def _text_lines(path):
    try:
        with open(path, "r", encoding="ascii", errors="strict") as fh:
            return fh.read().splitlines()
    except UnicodeDecodeError:
        raise ParseError("file is not ASCII text", path) from None
    except OSError as exc:
        raise CloudIOError(f"cannot read {path}: {exc}") from exc


def _parse_xyz(path):
    pts = []
    for lineno, line in enumerate(_text_lines(path), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        tok = s.replace(",", " ").split()
        if len(tok) < 3:
            raise ParseError(f"expected 3 coordinates, got {len(tok)}", path, lineno)
        pts.append(_floats(tok[:3], path, lineno))
    return pts


def _parse_off(path):
    lines = _text_lines(path)
    body = [(i, ln.split("#", 1)[0].strip()) for i, ln in enumerate(lines, start=1)]
    body = [(i, ln) for i, ln in body if ln]
    if not body or not body[0][1].upper().startswith("OFF"):
        raise ParseError("missing OFF header", path, body[0][0] if body else 1)
    lineno, head = body[0]
    rest = head[3:].split()
    pos = 1
    # some ModelNet files glue the counts onto the header ("OFF490 518 0")
    if not rest:
        if len(body) < 2:
            raise ParseError("missing vertex/face counts", path, lineno)
        lineno, counts_line = body[1]
        rest = counts_line.split()
        pos = 2
    if len(rest) < 2:
        raise ParseError("missing vertex/face counts", path, lineno)
    try:
        nv = int(rest[0])
    except ValueError:
        raise ParseError(f"bad vertex count {rest[0]!r}", path, lineno) from None
    if len(body) - pos < nv:
        raise ParseError(f"expected {nv} vertices, file ends early", path, body[-1][0])
    pts = []
    for lineno, ln in body[pos:pos + nv]:
        tok = ln.split()
        if len(tok) < 3:
            raise ParseError("vertex needs 3 coordinates", path, lineno)
        pts.append(_floats(tok[:3], path, lineno))
    return pts


def _parse_ply(path):
    lines = _text_lines(path)
    if not lines or lines[0].strip() != "ply":
        raise ParseError("missing 'ply' magic", path, 1)
    n_vertex = None
    props = []
    skip_before = 0  # lines of elements declared ahead of "vertex"
    current = None
    end = None
    for i, raw in enumerate(lines[1:], start=2):
        tok = raw.split()
        if not tok or tok[0] in ("comment", "obj_info"):
            continue
        if tok[0] == "format":
            if len(tok) < 2 or tok[1] != "ascii":
                raise ParseError("only ASCII PLY is supported", path, i)
        elif tok[0] == "element":
            if len(tok) != 3:
                raise ParseError("malformed element line", path, i)
            current = tok[1]
            try:
                count = int(tok[2])
            except ValueError:
                raise ParseError(f"bad element count {tok[2]!r}", path, i) from None
            if current == "vertex":
                n_vertex = count
            elif n_vertex is None:
                skip_before += count
        elif tok[0] == "property":
            if current == "vertex":
                props.append(tok[-1])
        elif tok[0] == "end_header":
            end = i
            break
        else:
            raise ParseError(f"unexpected header keyword {tok[0]!r}", path, i)
    if end is None:
        raise ParseError("missing end_header", path, len(lines))
    if n_vertex is None:
        raise ParseError("no vertex element", path, end)
    try:
        cols = [props.index(c) for c in ("x", "y", "z")]
    except ValueError:
        raise ParseError("vertex element lacks x/y/z properties", path, end) from None
    start = end + skip_before
    pts = []
    for k in range(n_vertex):
        lineno = start + k + 1
        if lineno > len(lines):
            raise ParseError(f"expected {n_vertex} vertices, file ends early", path, len(lines))
        tok = lines[lineno - 1].split()
        if len(tok) < len(props):
            raise ParseError(f"expected {len(props)} values, got {len(tok)}", path, lineno)
        pts.append(_floats([tok[c] for c in cols], path, lineno))
    return pts


def _read_pclb(path):
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise CloudIOError(f"cannot read {path}: {exc}") from exc
    if len(data) < _PCLB_HEADER.size:
        raise ParseError("truncated PCLB header", path)
    magic, count = _PCLB_HEADER.unpack_from(data)
    if magic != PCLB_MAGIC:
        raise ParseError(f"bad PCLB magic {magic!r}", path)
    expected = _PCLB_HEADER.size + 12 * count
    if len(data) != expected:
        raise ParseError(f"PCLB size {len(data)} does not match count {count} ({expected} bytes)", path)
    return np.frombuffer(data, dtype="<f4", offset=_PCLB_HEADER.size).reshape(count, 3)


def load_cloud(path, fmt=None, label=None):
    """Load a cloud; ``fmt`` defaults to the one implied by the file suffix."""
    fmt = _coerce_format(fmt, path)
    if not os.path.isfile(path):
        raise CloudIOError(f"no such file: {path}")
    if fmt is CloudFormat.PCLB:
        pts = _read_pclb(path)
    elif fmt is CloudFormat.XYZ:
        pts = _parse_xyz(path)
    elif fmt is CloudFormat.OFF:
        pts = _parse_off(path)
    else:
        pts = _parse_ply(path)
    pts = np.asarray(pts, dtype=np.float64).reshape(-1, 3)
    if pts.shape[0] == 0:
        raise EmptyCloud(f"{path}: no points")
    if not np.all(np.isfinite(pts)):
        raise ParseError("non-finite coordinate", path)
    return PointCloud(pts, label=label, source_path=str(path))


def encode_cloud(cloud, fmt):
    """Serialize ``cloud`` to bytes in ``fmt``."""
    fmt = _coerce_format(fmt, None)
    pts = cloud.points
    if fmt is CloudFormat.PCLB:
        return _PCLB_HEADER.pack(PCLB_MAGIC, len(pts)) + pts.astype("<f4").tobytes()
    rows = "".join(f"{x:.9g} {y:.9g} {z:.9g}\n" for x, y, z in pts.tolist())
    if fmt is CloudFormat.XYZ:
        text = rows
    elif fmt is CloudFormat.OFF:
        text = f"OFF\n{len(pts)} 0 0\n" + rows
    else:
        text = (
            "ply\nformat ascii 1.0\n"
            f"element vertex {len(pts)}\n"
            "property float x\nproperty float y\nproperty float z\n"
            "end_header\n" + rows
        )
    return text.encode("ascii")


def save_cloud(cloud, path, fmt=None):
    fmt = _coerce_format(fmt, path)
    data = encode_cloud(cloud, fmt)
    parent = os.path.dirname(os.fspath(path))
    if parent and not os.path.isdir(parent):
        raise CloudIOError(f"directory does not exist: {parent}")
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise CloudIOError(f"cannot write {path}: {exc}") from exc
    return data
