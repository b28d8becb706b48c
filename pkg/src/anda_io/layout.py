"""
Bit-plane layout of Anda groups and the `.anda` / `.andt` containers.

Plane k of a group holds bit (M-1-k) of every element, element i in bit i of the
64-bit word, so planes come out most significant first. A group record is the
sign word followed by the M plane words; shared exponents live in their own byte
stream ahead of the records.
"""
from __future__ import annotations

import io
import os
import struct
from dataclasses import dataclass
from typing import BinaryIO, Dict, Tuple, Union

import numpy as np

from anda_io.constants import (
    ANDA_HEADER_FORMAT,
    ANDA_MAGIC,
    ANDT_DTYPE_CODES,
    ANDT_HEADER_FORMAT,
    ANDT_MAGIC,
    CONTAINER_VERSION,
    MAX_LANES_PER_WORD,
)
from anda_io.errors import (
    BadMagic,
    DtypeUnsupported,
    GroupTooWide,
    InvalidParams,
    PlaneCountMismatch,
    RankUnsupported,
    TruncatedStream,
    VersionUnsupported,
)
from anda_io.numfmt import AndaGroup, AndaParams, AndaTensor, check_mantissa_len, groups_per_row

ANDA_HEADER_SIZE = struct.calcsize(ANDA_HEADER_FORMAT)
ANDT_HEADER_SIZE = struct.calcsize(ANDT_HEADER_FORMAT)
_CODE_TO_DTYPE = {code: np.dtype(name) for name, code in ANDT_DTYPE_CODES.items()}

Sink = Union[str, os.PathLike, BinaryIO]


@dataclass(frozen=True)
class PackedGroup:
    sign_plane: int
    bit_planes: Tuple[int, ...]
    shared_exp_byte: int

    @property
    def mantissa_len(self) -> int:
        return len(self.bit_planes)

    @property
    def shared_exp(self) -> int:
        return exp_from_byte(self.shared_exp_byte)


def exp_to_byte(exp: int) -> int:
    return int(exp) & 0xFF


def exp_from_byte(byte: int) -> int:
    byte = int(byte) & 0xFF
    return byte - 256 if byte >= 128 else byte


def _lanes(n: int) -> np.ndarray:
    return np.arange(n, dtype=np.uint64)


def bits_to_words(bits: np.ndarray) -> np.ndarray:
    # bits: (..., lanes) of 0/1 -> (...) uint64 words
    shifted = bits.astype(np.uint64) << _lanes(bits.shape[-1])
    return np.bitwise_or.reduce(shifted, axis=-1) if bits.shape[-1] else np.zeros(bits.shape[:-1], np.uint64)


def words_to_bits(words: np.ndarray, n: int) -> np.ndarray:
    return ((np.asarray(words, dtype=np.uint64)[..., None] >> _lanes(n)) & np.uint64(1)).astype(np.uint32)


def plane_bits(mantissas: np.ndarray, m: int) -> np.ndarray:
    """(..., gs) mantissas -> (..., M, gs) bits, plane 0 most significant."""
    shifts = np.arange(m - 1, -1, -1, dtype=np.uint32)
    return (np.asarray(mantissas, dtype=np.uint32)[..., None, :] >> shifts[:, None]) & 1


def planes_to_mantissas(bits: np.ndarray, m: int) -> np.ndarray:
    weights = (np.uint32(1) << np.arange(m - 1, -1, -1, dtype=np.uint32))
    return (bits.astype(np.uint32) * weights[:, None]).sum(axis=-2, dtype=np.uint32)


def pack_group(group: AndaGroup) -> PackedGroup:
    if len(group) > MAX_LANES_PER_WORD:
        raise GroupTooWide(f"group of {len(group)} does not fit a {MAX_LANES_PER_WORD}-bit plane")
    words = bits_to_words(plane_bits(group.mantissas, group.mantissa_len))
    return PackedGroup(
        sign_plane=int(bits_to_words(group.signs)),
        bit_planes=tuple(int(w) for w in words),
        shared_exp_byte=exp_to_byte(group.shared_exp),
    )


def unpack_group(packed: PackedGroup, m: int, group_size: int) -> AndaGroup:
    m = check_mantissa_len(m)
    if len(packed.bit_planes) != m:
        raise PlaneCountMismatch(f"expected {m} bit-planes, got {len(packed.bit_planes)}")
    if group_size > MAX_LANES_PER_WORD:
        raise GroupTooWide(f"group of {group_size} does not fit a {MAX_LANES_PER_WORD}-bit plane")
    bits = words_to_bits(np.array(packed.bit_planes, dtype=np.uint64), group_size)
    signs = words_to_bits(np.uint64(packed.sign_plane), group_size)
    return AndaGroup(
        shared_exp=packed.shared_exp,
        signs=signs,
        mantissas=planes_to_mantissas(bits, m),
        mantissa_len=m,
    )


def pack_tensor(tensor: AndaTensor) -> Tuple[np.ndarray, np.ndarray]:
    """
    Returns (exponent bytes, words): one byte per group and a (groups, M+1) word
    matrix with the sign word first, groups in row-major order.
    """
    gs = tensor.group_size
    if gs > MAX_LANES_PER_WORD:
        raise GroupTooWide(f"group size {gs} exceeds {MAX_LANES_PER_WORD} lanes")
    m = tensor.mantissa_len
    signs = tensor.signs.reshape(-1, gs)
    mantissas = tensor.mantissas.reshape(-1, gs)
    words = np.empty((signs.shape[0], m + 1), dtype=np.uint64)
    words[:, 0] = bits_to_words(signs)
    words[:, 1:] = bits_to_words(plane_bits(mantissas, m))
    exps = (tensor.shared_exps.reshape(-1).astype(np.int64) & 0xFF).astype(np.uint8)
    return exps, words


def unpack_tensor(exps: np.ndarray, words: np.ndarray, rows: int, cols: int, params: AndaParams) -> AndaTensor:
    gs, m = params.group_size, params.mantissa_len
    ng = groups_per_row(cols, gs)
    if words.shape != (rows * ng, m + 1):
        raise PlaneCountMismatch(f"expected word matrix {(rows * ng, m + 1)}, got {words.shape}")
    bits = words_to_bits(words, gs)
    signs = bits[:, 0, :]
    mantissas = planes_to_mantissas(bits[:, 1:, :], m)
    shared = exps.astype(np.int16)
    shared = np.where(shared >= 128, shared - 256, shared)
    return AndaTensor(
        rows,
        cols,
        params,
        shared.reshape(rows, ng),
        signs.reshape(rows, ng, gs),
        mantissas.reshape(rows, ng, gs),
    )


def storage_bits(m: int, group_size: int, group_count: int) -> int:
    """
    Bits for `group_count` groups: sign plane, M mantissa planes and one exponent
    byte each. Groups wider than 64 take ceil(gs/64) words per plane.
    """
    if group_count <= 0:
        return 0
    words_per_plane = -(-group_size // MAX_LANES_PER_WORD)
    return group_count * (MAX_LANES_PER_WORD * words_per_plane * (m + 1) + 8)


def _open_sink(sink: Sink, mode: str):
    if isinstance(sink, (str, os.PathLike)):
        return open(sink, mode), True
    return sink, False


def write_container(tensor: AndaTensor, sink: Sink) -> int:
    exps, words = pack_tensor(tensor)
    header = struct.pack(
        ANDA_HEADER_FORMAT,
        ANDA_MAGIC,
        CONTAINER_VERSION,
        tensor.group_size,
        tensor.mantissa_len,
        0,
        tensor.rows,
        tensor.cols,
        tensor.group_count,
    )
    payload = header + exps.tobytes() + words.astype("<u8").tobytes()
    f, owned = _open_sink(sink, "wb")
    try:
        f.write(payload)
    finally:
        if owned:
            f.close()
    return len(payload)


def _read_all(source: Sink) -> bytes:
    if isinstance(source, (bytes, bytearray)):
        return bytes(source)
    f, owned = _open_sink(source, "rb")
    try:
        return f.read()
    finally:
        if owned:
            f.close()


def read_anda_header(data: bytes) -> Dict[str, int]:
    if len(data) < ANDA_HEADER_SIZE:
        if len(data) >= 4 and data[:4] != ANDA_MAGIC:
            raise BadMagic(f"bad magic {data[:4]!r}")
        raise TruncatedStream(f"{len(data)} bytes is shorter than the header")
    magic, version, gs, m, _reserved, rows, cols, count = struct.unpack_from(ANDA_HEADER_FORMAT, data)
    if magic != ANDA_MAGIC:
        raise BadMagic(f"bad magic {magic!r}")
    if version != CONTAINER_VERSION:
        raise VersionUnsupported(f"container version {version} is not supported")
    return {
        "group_size": gs,
        "mantissa_len": m,
        "rows": rows,
        "cols": cols,
        "group_count": count,
    }


def read_container(source: Sink) -> AndaTensor:
    data = _read_all(source)
    header = read_anda_header(data)
    gs, m = header["group_size"], header["mantissa_len"]
    rows, cols, count = header["rows"], header["cols"], header["group_count"]
    if not 1 <= gs <= MAX_LANES_PER_WORD:
        raise InvalidParams(f"group size {gs} in header is out of range")
    check_mantissa_len(m)
    if count != rows * groups_per_row(cols, gs):
        raise InvalidParams(f"group count {count} disagrees with a {rows}x{cols} tensor")
    expected = ANDA_HEADER_SIZE + count + count * (m + 1) * 8
    if len(data) < expected:
        raise TruncatedStream(f"expected {expected} bytes, found {len(data)}")
    if len(data) > expected:
        raise InvalidParams(f"{len(data) - expected} trailing bytes after plane stream")
    exps = np.frombuffer(data, dtype=np.uint8, count=count, offset=ANDA_HEADER_SIZE)
    words = np.frombuffer(data, dtype="<u8", count=count * (m + 1), offset=ANDA_HEADER_SIZE + count)
    return unpack_tensor(
        exps, words.astype(np.uint64).reshape(count, m + 1), rows, cols,
        AndaParams(group_size=gs, mantissa_len=m),
    )


def container_size(tensor_rows: int, tensor_cols: int, params: AndaParams) -> int:
    count = tensor_rows * groups_per_row(tensor_cols, params.group_size)
    return ANDA_HEADER_SIZE + storage_bits(params.mantissa_len, params.group_size, count) // 8


def write_raw_tensor(array: np.ndarray, sink: Sink) -> int:
    arr = np.asarray(array)
    if arr.ndim == 0:
        raise RankUnsupported("rank-0 tensors cannot be stored")
    code = ANDT_DTYPE_CODES.get(arr.dtype.name)
    if code is None:
        raise DtypeUnsupported(f"dtype {arr.dtype} is not one of {sorted(ANDT_DTYPE_CODES)}")
    header = struct.pack(ANDT_HEADER_FORMAT, ANDT_MAGIC, CONTAINER_VERSION, code, arr.ndim)
    dims = struct.pack(f"<{arr.ndim}I", *arr.shape)
    payload = header + dims + arr.astype(arr.dtype.newbyteorder("<")).tobytes(order="C")
    f, owned = _open_sink(sink, "wb")
    try:
        f.write(payload)
    finally:
        if owned:
            f.close()
    return len(payload)


def read_raw_header(data: bytes) -> Dict[str, object]:
    if len(data) >= 4 and data[:4] != ANDT_MAGIC:
        raise BadMagic(f"bad magic {data[:4]!r}")
    if len(data) < ANDT_HEADER_SIZE:
        raise TruncatedStream(f"{len(data)} bytes is shorter than the header")
    _magic, version, code, rank = struct.unpack_from(ANDT_HEADER_FORMAT, data)
    if version != CONTAINER_VERSION:
        raise VersionUnsupported(f"container version {version} is not supported")
    if code not in _CODE_TO_DTYPE:
        raise DtypeUnsupported(f"dtype code {code} is unknown")
    if rank == 0:
        raise RankUnsupported("rank-0 tensors are not supported")
    dims_end = ANDT_HEADER_SIZE + 4 * rank
    if len(data) < dims_end:
        raise TruncatedStream("stream ends inside the dimension list")
    dims = struct.unpack_from(f"<{rank}I", data, ANDT_HEADER_SIZE)
    return {"dtype": _CODE_TO_DTYPE[code], "shape": tuple(dims), "offset": dims_end}


def read_raw_tensor(source: Sink) -> np.ndarray:
    data = _read_all(source)
    header = read_raw_header(data)
    dtype, shape, offset = header["dtype"], header["shape"], header["offset"]
    count = int(np.prod(shape, dtype=np.int64))
    expected = offset + count * dtype.itemsize
    if len(data) < expected:
        raise TruncatedStream(f"expected {expected} bytes, found {len(data)}")
    arr = np.frombuffer(data, dtype=dtype.newbyteorder("<"), count=count, offset=offset)
    return arr.astype(dtype).reshape(shape)


def describe_container(path) -> Dict[str, object]:
    with open(path, "rb") as f:
        data = f.read()
    if data[:4] == ANDA_MAGIC:
        header = read_anda_header(data)
        header.update(
            kind="anda",
            file_bytes=len(data),
            payload_bits=storage_bits(header["mantissa_len"], header["group_size"], header["group_count"]),
        )
        return header
    header = read_raw_header(data)
    return {
        "kind": "andt",
        "dtype": header["dtype"].name,
        "shape": list(header["shape"]),
        "file_bytes": len(data),
    }


def to_bytes(tensor: AndaTensor) -> bytes:
    buf = io.BytesIO()
    write_container(tensor, buf)
    return buf.getvalue()
