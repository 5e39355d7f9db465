"""On-disk bitstream formats.

Raw: a 16-byte header (``b"RTNB"``, uint32 version, uint64 bit count, both
little-endian) followed by the packed payload, MSB-first and zero-padded.
Ascii: the characters ``0`` and ``1``; whitespace is ignored when reading.
"""

from __future__ import annotations

import os
import struct
from pathlib import Path

import numpy as np

from .extractor import BitStream

MAGIC = b"RTNB"
VERSION = 1
_HEADER = struct.Struct("<4sIQ")
ASCII_LINE = 64


class BitstreamFormatError(ValueError):
    pass


class BadMagic(BitstreamFormatError):
    pass


class VersionMismatch(BitstreamFormatError):
    pass


class TruncatedHeader(BitstreamFormatError):
    pass


class TruncatedPayload(BitstreamFormatError):
    pass


class TrailingData(BitstreamFormatError):
    pass


class IllegalCharacter(BitstreamFormatError):
    pass


def encode_raw(stream: BitStream) -> bytes:
    return _HEADER.pack(MAGIC, VERSION, stream.bit_count) + stream.payload


def decode_raw(data: bytes) -> BitStream:
    if len(data) < _HEADER.size:
        raise TruncatedHeader(f"file holds {len(data)} bytes, header needs {_HEADER.size}")
    magic, version, bit_count = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise BadMagic(f"bad magic {magic!r}")
    if version != VERSION:
        raise VersionMismatch(f"unsupported version {version}")
    payload = data[_HEADER.size:]
    need = (bit_count + 7) // 8
    if len(payload) < need:
        raise TruncatedPayload(f"header declares {bit_count} bits but payload has {len(payload)} bytes")
    if len(payload) > need:
        raise TrailingData(f"{len(payload) - need} bytes after the declared payload")
    try:
        return BitStream(bit_count, bytes(payload))
    except ValueError as exc:
        raise BitstreamFormatError(str(exc)) from exc


def encode_ascii(stream: BitStream) -> str:
    text = "".join("1" if b else "0" for b in stream.bits().tolist())
    lines = [text[i : i + ASCII_LINE] for i in range(0, len(text), ASCII_LINE)]
    return "\n".join(lines) + "\n"


def decode_ascii(text: str) -> BitStream:
    chars = "".join(text.split())
    bad = set(chars) - {"0", "1"}
    if bad:
        raise IllegalCharacter(f"illegal characters {sorted(bad)!r} in ascii bitstream")
    bits = np.frombuffer(chars.encode("ascii"), dtype=np.uint8) - ord("0")
    return BitStream.from_bits(bits)


def write_bitstream(stream: BitStream, path: str | os.PathLike, format: str = "raw") -> None:
    path = Path(path)
    if format == "raw":
        path.write_bytes(encode_raw(stream))
    elif format == "ascii":
        path.write_text(encode_ascii(stream), encoding="ascii")
    else:
        raise ValueError(f"unknown bitstream format {format!r}")


def read_bitstream(path: str | os.PathLike, format: str = "raw") -> BitStream:
    path = Path(path)
    if format == "raw":
        return decode_raw(path.read_bytes())
    if format == "ascii":
        return decode_ascii(path.read_text(encoding="ascii", errors="replace"))
    raise ValueError(f"unknown bitstream format {format!r}")
