"""Model file format

Layout, all integers little-endian::

    b"NWLC"                 magic
    uint16                  format version
    uint32                  header length in bytes
    header                  UTF-8 JSON: {"spec", "scaler", "params": [{"name", "shape"}], "meta"}
    payload                 float64 ('<f8') values of every parameter in header order, C order
"""

import json
import struct
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
from loguru import logger

from ..errors import ValidationError
from .models import ModelSpec
from .scaling import Standardizer
from .training import TrainedModel

MAGIC = b"NWLC"
FORMAT_VERSION = 1
_PREAMBLE = struct.Struct("<4sHI")


def save_model(trained: TrainedModel, path: Union[str, Path], meta: Optional[Dict[str, Any]] = None) -> Path:
    """Write a trained model to ``path`` and return the path"""
    path = Path(path)
    names = list(trained.params)
    header = {
        "spec": trained.spec.to_dict(),
        "scaler": trained.scaler.to_dict(),
        "params": [{"name": n, "shape": list(trained.params[n].shape)} for n in names],
        "meta": meta or {},
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    payload = b"".join(np.ascontiguousarray(trained.params[n], dtype="<f8").tobytes() for n in names)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(_PREAMBLE.pack(MAGIC, FORMAT_VERSION, len(header_bytes)) + header_bytes + payload)
    logger.debug(f"Saved model to {path}")
    return path


def read_header(path: Union[str, Path]) -> Dict[str, Any]:
    header, _ = _read(Path(path))
    return header


def _read(path: Path) -> Tuple[Dict[str, Any], bytes]:
    data = path.read_bytes()
    if len(data) < _PREAMBLE.size:
        raise ValidationError("model_file", f"{path} is too short to be a model file")
    magic, version, header_len = _PREAMBLE.unpack_from(data)
    if magic != MAGIC:
        raise ValidationError("model_file", f"{path} has bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise ValidationError("model_file", f"unsupported format version {version}")
    start = _PREAMBLE.size
    header = json.loads(data[start:start + header_len].decode("utf-8"))
    return header, data[start + header_len:]


def load_model(path: Union[str, Path]) -> TrainedModel:
    """Read a model written by ``save_model``"""
    path = Path(path)
    header, payload = _read(path)
    values = np.frombuffer(payload, dtype="<f8")
    params: Dict[str, np.ndarray] = {}
    offset = 0
    for entry in header["params"]:
        size = int(np.prod(entry["shape"], dtype=int))
        if offset + size > len(values):
            raise ValidationError("model_file", f"payload truncated at parameter {entry['name']}")
        params[entry["name"]] = values[offset:offset + size].reshape(entry["shape"]).astype(float)
        offset += size
    if offset != len(values):
        raise ValidationError("model_file", f"{len(values) - offset} trailing values in payload")
    trained = TrainedModel(
        spec=ModelSpec.from_dict(header["spec"]),
        scaler=Standardizer.from_dict(header["scaler"]),
        params=params,
    )
    trained.network()
    logger.debug(f"Loaded model from {path}")
    return trained
