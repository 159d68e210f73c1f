"""PGM (P5) / PFM (Pf) rasters, JSON helpers and raw cost-volume dumps."""
from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np

_HEADER_TOKEN = re.compile(rb"#[^\n]*\n|\s+|\S+")


def _pnm_tokens(buf: bytes, count: int) -> tuple[list[bytes], int]:
    """First ``count`` header tokens (comments skipped) and the data offset."""
    toks, pos = [], 0
    while len(toks) < count:
        m = _HEADER_TOKEN.match(buf, pos)
        if m is None:
            raise ValueError("truncated PNM header")
        tok = m.group()
        pos = m.end()
        if not tok.startswith(b"#") and not tok.isspace():
            toks.append(tok)
    # exactly one whitespace byte separates header and raster
    return toks, pos + 1


def read_pgm(path, normalize: bool = True) -> np.ndarray:
    """Binary PGM, 8- or 16-bit. ``normalize`` maps to [0, 1] by maxval."""
    buf = Path(path).read_bytes()
    toks, off = _pnm_tokens(buf, 4)
    if toks[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM (magic {toks[0]!r})")
    w, h, maxval = (int(t) for t in toks[1:])
    if not 0 < maxval < 65536:
        raise ValueError(f"{path}: bad maxval {maxval}")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    n = w * h
    data = np.frombuffer(buf, dtype=dtype, count=n, offset=off)
    img = data.reshape(h, w)
    if normalize:
        return img.astype(np.float64) / maxval
    return img.astype(np.int64)


def write_pgm(path, image, maxval: int | None = None) -> None:
    """Write integer data as-is, float data in [0, 1] scaled to ``maxval``."""
    a = np.asarray(image)
    if a.ndim != 2:
        raise ValueError("PGM needs a 2D array")
    if np.issubdtype(a.dtype, np.floating):
        maxval = maxval or 255
        a = np.rint(np.clip(a, 0.0, 1.0) * maxval)
    else:
        if a.size and a.min() < 0:
            raise ValueError("PGM cannot store negative values")
        maxval = maxval or (255 if (a.size == 0 or a.max() <= 255) else 65535)
        if a.size and a.max() > maxval:
            raise ValueError(f"value {a.max()} exceeds maxval {maxval}")
    if not 0 < maxval < 65536:
        raise ValueError(f"bad maxval {maxval}")
    dtype = ">u2" if maxval > 255 else "u1"
    h, w = a.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n{maxval}\n".encode("ascii"))
        fh.write(np.ascontiguousarray(a.astype(dtype)).tobytes())


def read_pfm(path) -> np.ndarray:
    """Grayscale PFM as float32, top row first."""
    buf = Path(path).read_bytes()
    toks, off = _pnm_tokens(buf, 4)
    if toks[0] != b"Pf":
        raise ValueError(f"{path}: not a grayscale PFM (magic {toks[0]!r})")
    w, h = int(toks[1]), int(toks[2])
    scale = float(toks[3])
    dtype = np.dtype("<f4") if scale < 0 else np.dtype(">f4")
    data = np.frombuffer(buf, dtype=dtype, count=w * h, offset=off).reshape(h, w)
    # PFM stores the bottom row first
    return np.flipud(data).astype(np.float32)


def write_pfm(path, image) -> None:
    a = np.asarray(image, dtype=np.float32)
    if a.ndim != 2:
        raise ValueError("PFM needs a 2D array")
    h, w = a.shape
    with open(path, "wb") as fh:
        fh.write(f"Pf\n{w} {h}\n-1.0\n".encode("ascii"))
        fh.write(np.ascontiguousarray(np.flipud(a)).astype("<f4").tobytes())


def read_image(path) -> np.ndarray:
    """Observation raster from .pfm or .pgm, as float64."""
    suffix = Path(path).suffix.lower()
    if suffix == ".pfm":
        return read_pfm(path).astype(np.float64)
    if suffix == ".pgm":
        return read_pgm(path)
    raise ValueError(f"unsupported image format {suffix!r} ({path})")


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())


def dump_cost_volume(path, volume) -> None:
    """Raw little-endian float32 H x W x L plus a ``.json`` sidecar."""
    c = np.asarray(volume.cost, dtype="<f4")
    h, w, n = c.shape
    Path(path).write_bytes(np.ascontiguousarray(c).tobytes())
    meta = {"width": w, "height": h, "L": n, "layout": "HWL", "dtype": "float32-le"}
    if volume.label_set is not None:
        meta["label_depths"] = [float(d) for d in volume.label_set.depths]
    write_json(str(path) + ".json", meta)


def load_cost_volume(path) -> tuple[np.ndarray, dict]:
    meta = read_json(str(path) + ".json")
    c = np.fromfile(path, dtype="<f4").reshape(meta["height"], meta["width"], meta["L"])
    return c, meta
