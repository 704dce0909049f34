"""Dataset ingestion: CSV vectors, JSONL objects, image directories.

Object uuids derive from a stable content hash, so re-ingesting the
same source yields the same ids regardless of when or where. Duplicate
content is rejected rather than silently collapsed.
"""
from __future__ import annotations

import base64
import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .blackboard import DataObject


class IngestionError(ValueError):
    pass


class UnreadableSource(IngestionError):
    pass


class DimensionMismatch(IngestionError):
    pass


class DuplicateObject(IngestionError):
    pass


@dataclass(frozen=True)
class DatasetBinding:
    source: str
    format: str  # csv-vectors | jsonl-objects | image-directory
    id_column: str | None = None
    content_columns: tuple[str, ...] | None = None
    glob: str = "*.png"

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"source": self.source, "format": self.format}
        if self.id_column:
            out["idColumn"] = self.id_column
        if self.content_columns:
            out["contentColumns"] = list(self.content_columns)
        if self.format == "image-directory":
            out["glob"] = self.glob
        return out

    @staticmethod
    def from_json(raw: dict[str, Any]) -> "DatasetBinding":
        cols = raw.get("contentColumns")
        return DatasetBinding(
            source=raw["source"],
            format=raw["format"],
            id_column=raw.get("idColumn"),
            content_columns=tuple(cols) if cols else None,
            glob=raw.get("glob", "*.png"),
        )


def _content_uuid(payload: bytes) -> str:
    return "obj-" + hashlib.sha1(payload).hexdigest()[:16]


def _parse_float(raw: str, where: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise DimensionMismatch(f"{where}: {raw!r} is not a number") from None
    if not math.isfinite(value):
        raise DimensionMismatch(f"{where}: non-finite value {raw!r}")
    return value


def _ingest_csv(binding: DatasetBinding) -> list[DataObject]:
    path = Path(binding.source)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UnreadableSource(f"cannot read {path}: {exc}") from None
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise UnreadableSource(f"{path}: empty CSV")
    content_columns = list(binding.content_columns or [])
    if not content_columns:
        content_columns = [
            c for c in reader.fieldnames if c != (binding.id_column or "")
        ]
    missing = [c for c in content_columns if c not in reader.fieldnames]
    if missing:
        raise UnreadableSource(f"{path}: missing column(s) {missing}")

    objects: list[DataObject] = []
    seen: set[str] = set()
    expected_dim: int | None = None
    for row_no, row in enumerate(reader, start=2):  # header is line 1
        vector = [
            _parse_float(row[c], f"{path} row {row_no}, column {c!r}")
            for c in content_columns
        ]
        if expected_dim is None:
            expected_dim = len(vector)
        elif len(vector) != expected_dim:
            raise DimensionMismatch(
                f"{path} row {row_no}: {len(vector)} values, expected {expected_dim}"
            )
        if binding.id_column:
            uuid = row.get(binding.id_column, "")
            if not uuid:
                raise UnreadableSource(f"{path} row {row_no}: empty id")
        else:
            uuid = _content_uuid(json.dumps(vector).encode("utf-8"))
        if uuid in seen:
            raise DuplicateObject(f"{path} row {row_no}: duplicate object {uuid!r}")
        seen.add(uuid)
        objects.append(DataObject(uuid=uuid, content={"vector": vector},
                                  display={"row": row_no}))
    if not objects:
        raise UnreadableSource(f"{path}: no data rows")
    return objects


def _ingest_jsonl(binding: DatasetBinding) -> list[DataObject]:
    path = Path(binding.source)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UnreadableSource(f"cannot read {path}: {exc}") from None
    objects: list[DataObject] = []
    seen: set[str] = set()
    dim: int | None = None
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise UnreadableSource(f"{path} line {line_no}: invalid JSON: {exc.msg}") from None
        content_keys = [k for k in ("vector", "text", "imageRef") if k in raw]
        if len(content_keys) != 1:
            raise UnreadableSource(
                f"{path} line {line_no}: need exactly one of vector/text/imageRef"
            )
        kind = content_keys[0]
        if kind == "vector":
            vector = [
                _parse_float(str(v), f"{path} line {line_no}") for v in raw["vector"]
            ]
            if dim is None:
                dim = len(vector)
            elif len(vector) != dim:
                raise DimensionMismatch(
                    f"{path} line {line_no}: {len(vector)} values, expected {dim}"
                )
            content = {"vector": vector}
        else:
            content = {kind: raw[kind]}
        uuid = raw.get("uuid") or _content_uuid(
            json.dumps(content, sort_keys=True).encode("utf-8")
        )
        if uuid in seen:
            raise DuplicateObject(f"{path} line {line_no}: duplicate object {uuid!r}")
        seen.add(uuid)
        display = raw.get("display", {})
        objects.append(DataObject(uuid=uuid, content=content, display=display))
    if not objects:
        raise UnreadableSource(f"{path}: no objects")
    return objects


def _ingest_images(binding: DatasetBinding) -> list[DataObject]:
    from PIL import Image

    root = Path(binding.source)
    if not root.is_dir():
        raise UnreadableSource(f"{root} is not a directory")
    paths = sorted(root.glob(binding.glob))
    if not paths:
        raise UnreadableSource(f"{root}: no files match {binding.glob!r}")
    objects: list[DataObject] = []
    seen: set[str] = set()
    shape: tuple[int, int] | None = None
    for path in paths:
        try:
            raw = path.read_bytes()
            image = Image.open(io.BytesIO(raw)).convert("L")
        except Exception as exc:
            raise UnreadableSource(f"cannot decode {path}: {exc}") from None
        if shape is None:
            shape = image.size
        elif image.size != shape:
            raise DimensionMismatch(
                f"{path}: image size {image.size} != {shape}"
            )
        # Flatten to grayscale intensities in [0, 1].
        vector = (np.asarray(image, dtype=float).ravel() / 255.0).tolist()
        uuid = _content_uuid(raw)
        if uuid in seen:
            raise DuplicateObject(f"{path}: duplicate image content")
        seen.add(uuid)
        objects.append(DataObject(
            uuid=uuid,
            content={"vector": vector},
            display={
                "path": str(path),
                "imageBase64": base64.b64encode(raw).decode("ascii"),
            },
        ))
    return objects


def ingest_dataset(binding: DatasetBinding) -> list[DataObject]:
    """Load the bound source into data objects with stable uuids."""
    if binding.format == "csv-vectors":
        return _ingest_csv(binding)
    if binding.format == "jsonl-objects":
        return _ingest_jsonl(binding)
    if binding.format == "image-directory":
        return _ingest_images(binding)
    raise UnreadableSource(f"unknown dataset format {binding.format!r}")
