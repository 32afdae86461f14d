"""File formats: binary feature/distance containers, CSV and label text.

Binary features: magic ``GRNF``, u32 version 1, u64 n, u64 d, then n*d
little-endian float32 values row-major. Binary distances: magic ``GRND``,
u32 version 1, u64 n, then n*n little-endian float32 row-major; symmetry
is validated to 1e-6 absolute on load and then enforced by averaging.

CSV fallbacks: features are n rows of d comma-separated numbers with an
optional header row (detected by a non-numeric first row); labels are one
integer per line, or CSV with (row_index, label) columns.
"""

from __future__ import annotations

import csv
import struct

import numpy as np

from .dataset import DistanceConfig, LabeledDataset, ValidationError, require_nonzero_rows

FEATURE_MAGIC = b"GRNF"
DISTANCE_MAGIC = b"GRND"
FORMAT_VERSION = 1
DISTANCE_SYMMETRY_TOL = 1e-6

_HEADER_FMT = "<4sI"


def _read_exact(fh, count: int, what: str) -> bytes:
    data = fh.read(count)
    if len(data) != count:
        raise ValidationError(f"truncated file while reading {what}")
    return data


def write_features_binary(path, features) -> None:
    X = np.ascontiguousarray(features, dtype="<f4")
    if X.ndim != 2:
        raise ValidationError("features must be 2-dimensional")
    n, d = X.shape
    with open(path, "wb") as fh:
        fh.write(struct.pack(_HEADER_FMT, FEATURE_MAGIC, FORMAT_VERSION))
        fh.write(struct.pack("<QQ", n, d))
        fh.write(X.tobytes(order="C"))


def read_features_binary(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic, version = struct.unpack(_HEADER_FMT, _read_exact(fh, 8, "header"))
        if magic != FEATURE_MAGIC:
            raise ValidationError(f"bad magic {magic!r}; expected {FEATURE_MAGIC!r}")
        if version != FORMAT_VERSION:
            raise ValidationError(f"unsupported feature format version {version}")
        n, d = struct.unpack("<QQ", _read_exact(fh, 16, "dimensions"))
        payload = _read_exact(fh, 4 * n * d, "feature values")
        extra = fh.read(1)
    if extra:
        raise ValidationError("trailing bytes after feature payload")
    return np.frombuffer(payload, dtype="<f4").reshape(n, d).astype(np.float64)


def write_distances_binary(path, values) -> None:
    V = np.ascontiguousarray(values, dtype="<f4")
    if V.ndim != 2 or V.shape[0] != V.shape[1]:
        raise ValidationError("distance matrix must be square")
    with open(path, "wb") as fh:
        fh.write(struct.pack(_HEADER_FMT, DISTANCE_MAGIC, FORMAT_VERSION))
        fh.write(struct.pack("<Q", V.shape[0]))
        fh.write(V.tobytes(order="C"))


def read_distances_binary(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic, version = struct.unpack(_HEADER_FMT, _read_exact(fh, 8, "header"))
        if magic != DISTANCE_MAGIC:
            raise ValidationError(f"bad magic {magic!r}; expected {DISTANCE_MAGIC!r}")
        if version != FORMAT_VERSION:
            raise ValidationError(f"unsupported distance format version {version}")
        (n,) = struct.unpack("<Q", _read_exact(fh, 8, "dimension"))
        payload = _read_exact(fh, 4 * n * n, "distance values")
        extra = fh.read(1)
    if extra:
        raise ValidationError("trailing bytes after distance payload")
    V = np.frombuffer(payload, dtype="<f4").reshape(n, n).astype(np.float64)
    return _validate_distances(V)


def _validate_distances(V: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(V)):
        raise ValidationError("non-finite distance value")
    if np.any(V < 0):
        raise ValidationError("negative distance value")
    asym = float(np.abs(V - V.T).max()) if V.size else 0.0
    if asym > DISTANCE_SYMMETRY_TOL:
        raise ValidationError(
            f"matrix asymmetry {asym:g} exceeds tolerance {DISTANCE_SYMMETRY_TOL:g}"
        )
    V = (V + V.T) / 2.0
    dmax = float(np.abs(np.diagonal(V)).max()) if V.size else 0.0
    if dmax > DISTANCE_SYMMETRY_TOL:
        raise ValidationError(f"distance diagonal must be zero (max {dmax:g})")
    np.fill_diagonal(V, 0.0)
    return V


def _is_float(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def _read_csv_rows(path) -> list[list[str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row and any(cell.strip() for cell in row)]
    if not rows:
        raise ValidationError(f"{path}: empty CSV file")
    return rows


def read_features_csv(path) -> np.ndarray:
    rows = _read_csv_rows(path)
    if not all(_is_float(cell) for cell in rows[0]):
        rows = rows[1:]  # header row
        if not rows:
            raise ValidationError(f"{path}: CSV contains only a header")
    width = len(rows[0])
    out = np.empty((len(rows), width), dtype=np.float64)
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ValidationError(f"{path}: row {i} has {len(row)} columns, expected {width}")
        try:
            out[i] = [float(cell) for cell in row]
        except ValueError as exc:
            raise ValidationError(f"{path}: non-numeric value in row {i}") from exc
    return out


def write_features_csv(path, features) -> None:
    X = np.asarray(features, dtype=np.float64)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for row in X:
            writer.writerow([repr(float(v)) for v in row])


def read_distances_csv(path) -> np.ndarray:
    V = read_features_csv(path)
    if V.shape[0] != V.shape[1]:
        raise ValidationError(f"{path}: distance CSV must be square, got {V.shape}")
    return _validate_distances(V)


def read_labels_text(path) -> np.ndarray:
    values = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            token = line.strip()
            if not token:
                continue
            try:
                values.append(int(token))
            except ValueError as exc:
                raise ValidationError(f"{path}:{lineno}: not an integer label") from exc
    if not values:
        raise ValidationError(f"{path}: no labels found")
    return np.array(values, dtype=np.int64)


def write_labels_text(path, labels) -> None:
    y = np.asarray(labels, dtype=np.int64)
    with open(path, "w", encoding="utf-8") as fh:
        for v in y:
            fh.write(f"{int(v)}\n")


def read_labels_csv(path) -> np.ndarray:
    rows = _read_csv_rows(path)
    if len(rows[0]) != 2:
        raise ValidationError(f"{path}: label CSV needs (row_index, label) columns")
    if not all(_is_float(cell) for cell in rows[0]):
        rows = rows[1:]
        if not rows:
            raise ValidationError(f"{path}: CSV contains only a header")
    out = np.empty(len(rows), dtype=np.int64)
    for i, row in enumerate(rows):
        try:
            row_index, label = int(row[0]), int(row[1])
        except (ValueError, IndexError) as exc:
            raise ValidationError(f"{path}: bad label row {i}") from exc
        if row_index != i:
            raise ValidationError(f"{path}: row_index {row_index} out of order at row {i}")
        out[i] = label
    return out


def write_labels_csv(path, labels) -> None:
    y = np.asarray(labels, dtype=np.int64)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["row_index", "label"])
        for i, v in enumerate(y):
            writer.writerow([i, int(v)])


def _sniff_magic(path) -> bytes:
    with open(path, "rb") as fh:
        return fh.read(4)


def read_features_auto(path) -> np.ndarray:
    if _sniff_magic(path) == FEATURE_MAGIC:
        return read_features_binary(path)
    return read_features_csv(path)


def read_distances_auto(path) -> np.ndarray:
    if _sniff_magic(path) == DISTANCE_MAGIC:
        return read_distances_binary(path)
    return read_distances_csv(path)


def read_labels_auto(path) -> np.ndarray:
    with open(path, "rb") as fh:
        head = fh.read(4096)
    if b"," in head.split(b"\n", 1)[0]:
        return read_labels_csv(path)
    return read_labels_text(path)


def load_dataset(features_path, labels_path, config: DistanceConfig = DistanceConfig()) -> LabeledDataset:
    """Load and validate a dataset from feature and label files.

    Class ids are remapped to a dense {0..k-1} range preserving ascending
    original-id order; the original ids stay available on the dataset.
    Rejects inputs the distance configuration cannot handle (zero-norm
    rows under cosine or normalized euclidean).
    """
    X = read_features_auto(features_path)
    y = read_labels_auto(labels_path)
    if y.shape[0] != X.shape[0]:
        raise ValidationError(
            f"row-count mismatch: {X.shape[0]} feature rows, {y.shape[0]} labels"
        )
    ds = LabeledDataset.from_arrays(X, y)
    if config.metric == "cosine" or config.normalize:
        require_nonzero_rows(ds.features)
    return ds


def load_distances(path) -> np.ndarray:
    """Load a distance matrix (binary or CSV), validated and symmetrized."""
    return read_distances_auto(path)
