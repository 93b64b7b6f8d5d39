"""Dataset ingestion (CSV, PGM images), influence rendering and comparison."""

from __future__ import annotations

import csv
import json
import os
import tempfile
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .core import Dataset, DegenerateError, FeatureKind, InfluenceVector, Mode, SchemaError, as_vector


class DataError(ValueError):
    """Malformed or inconsistent input data."""


def _binary_labels(raw: Sequence[float], where: Sequence[str]) -> np.ndarray:
    labels = np.asarray(raw, dtype=np.float64)
    alphabet = set(labels.tolist())
    if alphabet <= {-1.0, 1.0}:
        return labels
    if alphabet <= {0.0, 1.0}:
        return 2 * labels - 1
    bad = sorted(alphabet - {-1.0, 0.0, 1.0})
    if bad:
        j = int(np.flatnonzero(labels == bad[0])[0])
        raise DataError(f"{where[j]}: label {bad[0]:g} is not binary (expected -1/1 or 0/1)")
    raise DataError("mixed label alphabet: found -1, 0 and 1; use either {-1, 1} or {0, 1}")


def load_csv(
    path,
    label_column: str = "label",
    categorical: Sequence[str] = (),
    mode: str = "binary",
    drop: Sequence[str] = (),
) -> Dataset:
    """Read a headed CSV file into a :class:`Dataset`.

    Every column except the label and ``drop`` columns is a feature. Columns
    named in ``categorical`` keep their raw string values until
    :func:`mimkit.core.encode_categorical` is applied; the rest must parse as
    reals. Binary labels may be written as -1/1 or 0/1.
    """
    mode = Mode(mode)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if label_column not in header:
            raise DataError(f"{path}: no label column {label_column!r}; available columns: {', '.join(header)}")
        for name in (*categorical, *drop):
            if name not in header:
                raise DataError(f"{path}: unknown column {name!r}; available columns: {', '.join(header)}")
        label_at = header.index(label_column)
        feature_cols = [j for j, h in enumerate(header) if j != label_at and h not in drop]
        kinds = [FeatureKind.CATEGORICAL if header[j] in categorical else FeatureKind.NUMERIC for j in feature_cols]
        rows, labels, where = [], [], []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataError(f"{path}: line {line_no}: expected {len(header)} cells, got {len(row)}")
            values = []
            for j, kind in zip(feature_cols, kinds):
                cell = row[j].strip()
                if kind is FeatureKind.CATEGORICAL:
                    values.append(cell)
                    continue
                try:
                    values.append(float(cell))
                except ValueError:
                    raise DataError(f"{path}: line {line_no}, column {header[j]!r}: cannot parse {cell!r} as a number") from None
            try:
                labels.append(float(row[label_at]))
            except ValueError:
                raise DataError(
                    f"{path}: line {line_no}, column {label_column!r}: cannot parse {row[label_at]!r} as a label"
                ) from None
            rows.append(values)
            where.append(f"{path}: line {line_no}, column {label_column!r}")
    if not rows:
        raise DataError(f"{path}: no data rows")
    y = _binary_labels(labels, where) if mode is Mode.BINARY else np.asarray(labels)
    X = np.array(rows, dtype=object if FeatureKind.CATEGORICAL in kinds else np.float64)
    try:
        return Dataset(X, y, schema=tuple(kinds), mode=mode, feature_names=tuple(header[j] for j in feature_cols))
    except SchemaError as exc:
        raise DataError(f"{path}: {exc}") from exc


# --- netpbm -----------------------------------------------------------------


def _read_netpbm(path, magic: bytes) -> tuple[int, int, bytes]:
    data = Path(path).read_bytes()
    if data[:2] != magic:
        raise DataError(f"{path}: not a binary {magic.decode()} file")
    tokens, pos = [], 2
    while len(tokens) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] not in b"\r\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise DataError(f"{path}: truncated header")
        tokens.append(int(data[start:pos]))
    width, height, maxval = tokens
    if not 0 < maxval <= 255:
        raise DataError(f"{path}: only 8-bit images (maxval <= 255) are supported")
    return width, height, data[pos + 1 :]


def read_pgm(path) -> np.ndarray:
    """Decode a binary (P5) PGM into a ``(height, width)`` uint8 array."""
    width, height, raster = _read_netpbm(path, b"P5")
    if len(raster) < width * height:
        raise DataError(f"{path}: raster shorter than {width}x{height}")
    return np.frombuffer(raster[: width * height], dtype=np.uint8).reshape(height, width)


def read_ppm(path) -> np.ndarray:
    """Decode a binary (P6) PPM into a ``(height, width, 3)`` uint8 array."""
    width, height, raster = _read_netpbm(path, b"P6")
    if len(raster) < 3 * width * height:
        raise DataError(f"{path}: raster shorter than {width}x{height}x3")
    return np.frombuffer(raster[: 3 * width * height], dtype=np.uint8).reshape(height, width, 3)


def _atomic_write(path, payload: bytes):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_pgm(path, image: np.ndarray):
    image = np.asarray(image)
    if image.ndim != 2:
        raise SchemaError("PGM output needs a 2-D array")
    h, w = image.shape
    _atomic_write(path, b"P5\n%d %d\n255\n" % (w, h) + image.astype(np.uint8).tobytes())


def write_ppm(path, image: np.ndarray):
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3:
        raise SchemaError("PPM output needs a (height, width, 3) array")
    h, w, _ = image.shape
    _atomic_write(path, b"P6\n%d %d\n255\n" % (w, h) + image.astype(np.uint8).tobytes())


def write_text(path, text: str):
    _atomic_write(path, text.encode("utf-8"))


def _read_manifest(manifest) -> dict[str, float]:
    if isinstance(manifest, Mapping):
        return {str(k): float(v) for k, v in manifest.items()}
    out = {}
    with open(manifest, newline="", encoding="utf-8") as fh:
        for line_no, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].startswith("#"):
                continue
            if len(row) != 2:
                raise DataError(f"{manifest}: line {line_no}: expected 'filename,label'")
            name, label = row[0].strip(), row[1].strip()
            try:
                out[name] = float(label)
            except ValueError:
                if line_no == 1:  # header row
                    continue
                raise DataError(f"{manifest}: line {line_no}: cannot parse label {label!r}") from None
    return out


def load_image_dir(path, manifest, mode: str = "binary") -> tuple[Dataset, tuple[int, int]]:
    """Load P5 PGM images listed in ``manifest`` (a mapping or a ``filename,label`` CSV).

    Each image becomes one point of ``width * height`` brightness features in
    row-major order. Returns the dataset and the ``(width, height)`` shape.
    """
    root = Path(path)
    labels = _read_manifest(manifest)
    if not labels:
        raise DataError("manifest lists no images")
    rows, ys, shape, first = [], [], None, None
    for name, label in labels.items():
        file = root / name
        if not file.is_file():
            raise DataError(f"manifest references missing image {file}")
        img = read_pgm(file)
        if shape is None:
            shape, first = img.shape, name
        elif img.shape != shape:
            raise DataError(
                f"image {name} is {img.shape[1]}x{img.shape[0]}, expected {shape[1]}x{shape[0]} (as {first})"
            )
        rows.append(img.reshape(-1).astype(np.float64))
        ys.append(label)
    mode = Mode(mode)
    names = list(labels)
    y = _binary_labels(ys, [f"manifest entry {n!r}" for n in names]) if mode is Mode.BINARY else np.asarray(ys)
    return Dataset(np.array(rows), y, mode=mode), (shape[1], shape[0])


# --- rendering --------------------------------------------------------------


def render_influence_map(influence, width: int, height: int, out_path=None) -> np.ndarray:
    """Signed influence as colour: blue for positive, red for negative.

    Channels are scaled so the largest magnitude maps to 255; an all-zero
    vector renders black. Writes a P6 PPM when ``out_path`` is given and
    returns the ``(height, width, 3)`` image either way.
    """
    phi = as_vector(influence)
    if width * height != len(phi):
        raise SchemaError(f"{width}x{height} image needs {width * height} values, got {len(phi)}")
    peak = float(np.max(np.abs(phi))) if len(phi) else 0.0
    img = np.zeros((height, width, 3), dtype=np.uint8)
    if peak > 0:
        scaled = phi / peak * 255
        img[..., 2] = np.rint(np.clip(scaled, 0, None)).reshape(height, width)
        img[..., 0] = np.rint(np.clip(-scaled, 0, None)).reshape(height, width)
    if out_path is not None:
        write_ppm(out_path, img)
    return img


def decode_influence_map(image: np.ndarray, peak: float) -> np.ndarray:
    """Invert :func:`render_influence_map` given the original ``max |phi|``."""
    image = np.asarray(image, dtype=np.float64)
    return ((image[..., 2] - image[..., 0]) / 255 * peak).reshape(-1)


def shift_poi(poi, influence, eta: float = 0.25) -> np.ndarray:
    """Move the POI's pixels along the normalized influence, clamped to [0, 255]."""
    x = np.asarray(poi, dtype=np.float64)
    phi = as_vector(influence)
    if phi.shape != x.shape:
        raise SchemaError(f"POI has {x.size} values, influence has {phi.size}")
    peak = float(np.max(np.abs(phi))) if phi.size else 0.0
    if peak == 0:
        return x.copy()
    return np.clip(x + eta * phi / peak * 255, 0, 255)


def compare_measures(a, b) -> float:
    """Cosine similarity of two influence vectors."""
    a, b = as_vector(a), as_vector(b)
    if a.shape != b.shape:
        raise SchemaError(f"cannot compare vectors of length {a.size} and {b.size}")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise DegenerateError("cosine similarity is undefined for a zero vector")
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


def influence_to_json(influence: InfluenceVector, measure: str, parameters: dict) -> str:
    doc = {
        "measure": measure,
        "parameters": parameters,
        "poi": influence.poi_index,
        "values": [float(v) for v in influence.values],
    }
    if influence.metadata:
        doc["metadata"] = influence.metadata
    return json.dumps(doc, sort_keys=True) + "\n"


def read_influence_json(path) -> InfluenceVector:
    try:
        doc = json.loads(Path(path).read_text())
        return InfluenceVector(doc["values"], int(doc.get("poi", 0)), doc.get("metadata", {}))
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise DataError(f"{path}: not an influence JSON document ({exc})") from exc
