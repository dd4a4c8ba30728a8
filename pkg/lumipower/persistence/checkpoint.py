__doc__ = """
Binary checkpoint format (all integers little-endian):

    magic "LPWR" | u16 version
    u32 length | model spec (YAML)
    tensor table: u32 count, then per tensor
        u16 name length | name (UTF-8) | u8 dtype code | u8 ndim | u32 dims... | raw values
    u8 has_optimizer | optimizer tensor table (same layout) if set
    u32 length | configuration echo (YAML)
    u32 CRC32 of every preceding byte
"""

import os
import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Tuple

import numpy as np
import yaml

from lumipower.errors import CheckpointError
from lumipower.model import ModelSpec, PowerRegressionNet
from lumipower.tensor import precision
from lumipower.utility.io import atomic_write_bytes
from lumipower.utility.logging import get_script_logger

MAGIC = b"LPWR"
FORMAT_VERSION = 1

_HEADER = struct.Struct("<4sH")
_U8 = struct.Struct("<B")
_U16 = struct.Struct("<H")
_U32 = struct.Struct("<I")

DTYPE_CODES = {np.dtype("<f4"): 1, np.dtype("<f8"): 2}
CODE_DTYPES = {code: dtype for dtype, code in DTYPE_CODES.items()}

logger = get_script_logger(os.path.basename(__file__))


@dataclass
class Checkpoint:
    """
    Attributes
    ----------
    spec : ModelSpec
    tensors : Dict[str, np.ndarray]
        Parameters and batch-norm statistics by dotted name.
    optimizer : Dict[str, np.ndarray] | None
        Momentum buffers.
    config : dict
        Echo of the run configuration; "normalization" holds (mu, sigma).
    """

    spec: ModelSpec
    tensors: Dict[str, np.ndarray]
    optimizer: Optional[Dict[str, np.ndarray]] = None
    config: dict = field(default_factory=dict)

    @classmethod
    def from_model(cls, model: PowerRegressionNet, optimizer=None, config: Optional[dict] = None):
        return cls(
            spec=model.spec,
            tensors={name: np.array(value) for name, value in model.state_dict().items()},
            optimizer=None if optimizer is None else {k: np.array(v) for k, v in optimizer.state_dict().items()},
            config=dict(config or {}),
        )

    @property
    def normalization(self) -> Optional[Tuple[float, float]]:
        stats = self.config.get("normalization")
        return None if stats is None else (float(stats[0]), float(stats[1]))

    def build_model(self) -> PowerRegressionNet:
        """Model of `spec` holding the stored values, in the stored precision."""
        dtype = next(iter(self.tensors.values())).dtype if self.tensors else np.float32
        with precision(dtype):
            model = PowerRegressionNet(self.spec)
        model.load_state_dict(self.tensors)
        return model

    # encoding -----------------------------------------------------------
    def to_bytes(self) -> bytes:
        chunks = [_HEADER.pack(MAGIC, FORMAT_VERSION)]
        chunks.append(_text_block(self.spec.to_yaml_str()))
        chunks.append(_tensor_table(self.tensors))
        chunks.append(_U8.pack(self.optimizer is not None))
        if self.optimizer is not None:
            chunks.append(_tensor_table(self.optimizer))
        chunks.append(_text_block(yaml.safe_dump(self.config, sort_keys=True)))
        payload = b"".join(chunks)
        return payload + _U32.pack(zlib.crc32(payload))

    @classmethod
    def from_bytes(cls, data: bytes) -> "Checkpoint":
        if len(data) < _HEADER.size:
            raise CheckpointError("Checkpoint is truncated")
        magic, version = _HEADER.unpack_from(data, 0)
        if magic != MAGIC:
            raise CheckpointError(f"Not a checkpoint file (magic {magic!r})")
        if version != FORMAT_VERSION:
            raise CheckpointError(f"Unsupported checkpoint version {version} (expected {FORMAT_VERSION})")
        if len(data) < _HEADER.size + _U32.size:
            raise CheckpointError("Checkpoint is truncated")
        payload, (stored_crc,) = data[: -_U32.size], _U32.unpack_from(data, len(data) - _U32.size)
        if zlib.crc32(payload) != stored_crc:
            raise CheckpointError("Checkpoint checksum mismatch (corrupt or truncated file)")

        reader = _Reader(payload, _HEADER.size)
        try:
            spec = ModelSpec.from_yaml_str(reader.text())
            tensors = reader.tensor_table()
            optimizer = reader.tensor_table() if reader.unpack(_U8) else None
            config = yaml.safe_load(reader.text()) or {}
        except (struct.error, UnicodeDecodeError, yaml.YAMLError, KeyError, TypeError) as err:
            raise CheckpointError(f"Malformed checkpoint: {err}") from err
        if reader.offset != len(payload):
            raise CheckpointError("Trailing bytes after checkpoint payload")
        return cls(spec=spec, tensors=tensors, optimizer=optimizer, config=config)


def _text_block(text: str) -> bytes:
    raw = text.encode("utf-8")
    return _U32.pack(len(raw)) + raw


def _tensor_table(tensors: Dict[str, np.ndarray]) -> bytes:
    chunks = [_U32.pack(len(tensors))]
    for name, value in tensors.items():
        value = np.asarray(value)
        dtype = value.dtype.newbyteorder("<")
        if dtype not in DTYPE_CODES:
            raise CheckpointError(f"Unsupported dtype {value.dtype} for tensor {name}")
        raw_name = name.encode("utf-8")
        chunks.append(_U16.pack(len(raw_name)) + raw_name)
        chunks.append(_U8.pack(DTYPE_CODES[dtype]) + _U8.pack(value.ndim))
        chunks.append(b"".join(_U32.pack(d) for d in value.shape))
        chunks.append(np.ascontiguousarray(value, dtype=dtype).tobytes())
    return b"".join(chunks)


class _Reader:
    def __init__(self, buffer: bytes, offset: int = 0):
        self.buffer = buffer
        self.offset = offset

    def unpack(self, fmt: struct.Struct):
        (value,) = fmt.unpack_from(self.buffer, self.offset)
        self.offset += fmt.size
        return value

    def raw(self, size: int) -> bytes:
        if self.offset + size > len(self.buffer):
            raise struct.error("unexpected end of data")
        chunk = self.buffer[self.offset : self.offset + size]
        self.offset += size
        return chunk

    def text(self) -> str:
        return self.raw(self.unpack(_U32)).decode("utf-8")

    def tensor_table(self) -> Dict[str, np.ndarray]:
        tensors = {}
        for _ in range(self.unpack(_U32)):
            name = self.raw(self.unpack(_U16)).decode("utf-8")
            code, ndim = self.unpack(_U8), self.unpack(_U8)
            if code not in CODE_DTYPES:
                raise struct.error(f"unknown dtype code {code} for tensor {name}")
            dtype = CODE_DTYPES[code]
            shape = tuple(self.unpack(_U32) for _ in range(ndim))
            count = int(np.prod(shape, dtype=np.int64))
            tensors[name] = np.frombuffer(self.raw(count * dtype.itemsize), dtype=dtype).reshape(shape).copy()
        return tensors


def save_checkpoint(path: str | Path, checkpoint: Checkpoint):
    atomic_write_bytes(path, checkpoint.to_bytes())
    logger.info(f"saved checkpoint {path} ({len(checkpoint.tensors)} tensors)")


def load_checkpoint(path: str | Path) -> Checkpoint:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Checkpoint not found: {path}")
    return Checkpoint.from_bytes(path.read_bytes())
