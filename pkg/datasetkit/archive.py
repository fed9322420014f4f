"""
轨迹归档容器（带版本与校验和的二进制格式）

布局（小端）:
    magic    4s   b"SVPA"
    version  u16
    reserved u16
    count    u32
    每条记录:
        header_len u32
        header     JSON(utf-8): task_id, seed, success, length, height, width
        frames     float32[L, H, W, 3]
        ee_pos     float64[L, 3]
        obj_pos    float64[L, 3]
        distance   float64[L]
        actions    float64[L, 4]
    crc32    u32  覆盖此前全部字节
"""
import hashlib
import json
import logging
import struct
import zlib
from pathlib import Path
from typing import List, Sequence, Union

import numpy as np

from models.errors import ArchiveFormatError
from models.trajectory import TrajectoryRecord

logger = logging.getLogger(__name__)

MAGIC = b"SVPA"
ARCHIVE_VERSION = 1
_PREAMBLE = struct.Struct("<4sHHI")
_U32 = struct.Struct("<I")


def _layout(height: int, width: int):
    return (
        ("frames", np.float32, (height, width, 3)),
        ("ee_pos", np.float64, (3,)),
        ("obj_pos", np.float64, (3,)),
        ("distance", np.float64, ()),
        ("actions", np.float64, (4,)),
    )


def encode_archive(records: Sequence[TrajectoryRecord]) -> bytes:
    parts = [_PREAMBLE.pack(MAGIC, ARCHIVE_VERSION, 0, len(records))]
    for record in records:
        h, w = record.resolution
        header = json.dumps({
            "task_id": record.task_id.value,
            "seed": record.seed,
            "success": record.success,
            "length": record.length,
            "height": h,
            "width": w,
        }, sort_keys=True).encode("utf-8")
        parts += [_U32.pack(len(header)), header]
        for name, dtype, _ in _layout(h, w):
            parts.append(np.ascontiguousarray(getattr(record, name), dtype=np.dtype(dtype).newbyteorder("<")).tobytes())
    body = b"".join(parts)
    return body + _U32.pack(zlib.crc32(body) & 0xFFFFFFFF)


def decode_archive(data: bytes) -> List[TrajectoryRecord]:
    if len(data) < _PREAMBLE.size + _U32.size:
        raise ArchiveFormatError("归档文件过短")
    body, (crc,) = data[:-_U32.size], _U32.unpack(data[-_U32.size:])
    if zlib.crc32(body) & 0xFFFFFFFF != crc:
        raise ArchiveFormatError("归档校验和不匹配（文件损坏或被截断）")
    magic, version, _, count = _PREAMBLE.unpack_from(body, 0)
    if magic != MAGIC:
        raise ArchiveFormatError(f"未知的归档标识: {magic!r}")
    if version != ARCHIVE_VERSION:
        raise ArchiveFormatError(f"不支持的归档版本 {version}（期望 {ARCHIVE_VERSION}）")

    offset = _PREAMBLE.size
    records: List[TrajectoryRecord] = []
    for _ in range(count):
        try:
            (header_len,) = _U32.unpack_from(body, offset)
            offset += _U32.size
            header = json.loads(body[offset:offset + header_len].decode("utf-8"))
            offset += header_len
            length, h, w = int(header["length"]), int(header["height"]), int(header["width"])
        except (struct.error, ValueError, KeyError) as e:
            raise ArchiveFormatError(f"记录头解析失败: {e}") from e

        arrays = {}
        for name, dtype, tail in _layout(h, w):
            shape = (length,) + tail
            nbytes = int(np.prod(shape)) * np.dtype(dtype).itemsize
            if offset + nbytes > len(body):
                raise ArchiveFormatError(f"数据块 {name} 越界")
            block = np.frombuffer(body, dtype=np.dtype(dtype).newbyteorder("<"), count=int(np.prod(shape)),
                                  offset=offset)
            arrays[name] = block.astype(dtype).reshape(shape)
            offset += nbytes
        try:
            records.append(TrajectoryRecord(
                task_id=header["task_id"], seed=int(header["seed"]), success=bool(header["success"]), **arrays
            ))
        except ValueError as e:
            raise ArchiveFormatError(f"记录内容不合法: {e}") from e

    if offset != len(body):
        raise ArchiveFormatError(f"归档末尾存在 {len(body) - offset} 个多余字节")
    return records


def write_archive(records: Sequence[TrajectoryRecord], path: Union[str, Path]) -> str:
    """写入归档，返回文件 sha256"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = encode_archive(records)
    path.write_bytes(data)
    logger.info(f"✅ 已写入归档 {path} ({len(records)} 条记录)")
    return hashlib.sha256(data).hexdigest()


def read_archive(path: Union[str, Path]) -> List[TrajectoryRecord]:
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise ArchiveFormatError(f"无法读取归档 {path}: {e}") from e
    return decode_archive(data)


def file_sha256(path: Union[str, Path]) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
