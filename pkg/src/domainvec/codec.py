"""Binary wire format: self-extending integers, UL references, Domain Vectors.

SELF-EXTENDING INTEGERS
-----------------------
An unsigned integer i < 32 * 256^(n-1) is coded from n bytes, where the top
3 bits of the first byte code the length. We store n-1 there, so n runs
from 1 to 8 and the representable range is [0, 2^61). The remaining 5 bits
of byte 0, followed by bytes 1..n-1, hold the value big-endian::

    [L L L V V V V V] [V V V V V V V V] ... (n-1 payload bytes)
     ^^^^^ n-1         big-endian value bits

Size ranges::

    1 byte:   0 .. 31
    2 bytes:  32 .. 8191
    3 bytes:  8192 .. 2097151
    ...
    8 bytes:  up to 2^61 - 1

Encodings are canonical: the minimal n is required, and decoders reject
overlong forms. One value maps to exactly one byte string, which makes
encoded material safe to hash and deduplicate.

UL REFERENCES
-------------
A UL (Uniform Locator) points at the online definition of a Domain Space
and simultaneously identifies the data that follows it. Four wire forms,
selected by a tag byte:

    0  same-as-before      no payload; repeats the previous UL in the stream
    1  full URL            self-extending byte length + UTF-8 text
    2  numeric hierarchic  self-extending segment count + segments
    3  local table index   one self-extending integer

Same-as-before is only meaningful mid-stream; both encoder and decoder
reject it when no UL precedes it.

DOMAIN VECTORS
--------------
A Domain Vector is the UL of its space followed by a sequence of numbers.
On the wire::

    UL | presence bitmap | present values in flattened-dimension order

The bitmap has ceil(dim_count / 8) bytes; dimension j is present iff bit
(j % 8) of byte (j // 8) is set (LSB first). Per-kind value encodings:

    integer     zig-zag signed, self-extending
    list        enumeration index, self-extending
    money       fixed-scale decimal, scale 2: zig-zag mantissa
    float_*     fixed-scale decimal, scale from the dimension definition
    date/time   zig-zag count of the declared calendar unit
    text        self-extending byte length + UTF-8

Decimal dimensions carry an integer mantissa on the wire and the scale in
the definition, so byte output is deterministic and float round-trip drift
cannot occur. All functions here are pure; there is no shared state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from typing import Iterable, Protocol, Sequence, Union

from .errors import (
    ContextMissing,
    NonCanonical,
    SchemaMismatch,
    Truncated,
    ValueOutOfRange,
)

MAX_UINT = 1 << 61  # exclusive: 8 bytes carry 5 + 7*8 = 61 value bits

# ---------------------------------------------------------------------------
# Self-extending unsigned integers
# ---------------------------------------------------------------------------


def encode_uint(value: int) -> bytes:
    """Encode an unsigned integer in canonical self-extending form."""
    if value < 0 or value >= MAX_UINT:
        raise ValueOutOfRange(f"value {value} outside [0, 2**61)")
    if value < 32:
        return bytes([value])
    n = 1 + (value.bit_length() + 2) // 8
    return ((n - 1) << (5 + 8 * (n - 1)) | value).to_bytes(n, "big")


def decode_uint(data: bytes, offset: int = 0) -> tuple[int, int]:
    """Decode a self-extending integer at ``offset``.

    Returns ``(value, consumed)``. Rejects overlong encodings so that
    every value has exactly one accepted byte form.
    """
    if offset >= len(data):
        raise Truncated("need at least 1 byte for a self-extending integer")
    n = (data[offset] >> 5) + 1
    if offset + n > len(data):
        raise Truncated(f"length bits promise {n} bytes, {len(data) - offset} remain")
    value = int.from_bytes(data[offset : offset + n], "big") & ((1 << (5 + 8 * (n - 1))) - 1)
    if n > 1 and value < (1 << (5 + 8 * (n - 2))):
        raise NonCanonical(f"value {value} encoded with {n} bytes, fewer suffice")
    return value, n


def zigzag(value: int) -> int:
    """Map a signed integer to unsigned: 0,-1,1,-2,... -> 0,1,2,3,..."""
    return (value << 1) if value >= 0 else ((-value << 1) - 1)


def unzigzag(value: int) -> int:
    return (value >> 1) if (value & 1) == 0 else -((value + 1) >> 1)


def encode_sint(value: int) -> bytes:
    return encode_uint(zigzag(value))


def decode_sint(data: bytes, offset: int = 0) -> tuple[int, int]:
    raw, n = decode_uint(data, offset)
    return unzigzag(raw), n


def encode_text(value: str) -> bytes:
    raw = value.encode("utf-8")
    return encode_uint(len(raw)) + raw


def decode_text(data: bytes, offset: int = 0) -> tuple[str, int]:
    length, n = decode_uint(data, offset)
    end = offset + n + length
    if end > len(data):
        raise Truncated(f"text length {length} exceeds remaining bytes")
    return data[offset + n : end].decode("utf-8"), n + length


# ---------------------------------------------------------------------------
# UL references
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FullUrl:
    url: str


@dataclass(frozen=True)
class NumericHierarchic:
    path: tuple[int, ...]


@dataclass(frozen=True)
class LocalTableIndex:
    index: int


@dataclass(frozen=True)
class SameAsBefore:
    pass


UlRef = Union[FullUrl, NumericHierarchic, LocalTableIndex, SameAsBefore]

_TAG_SAME = 0
_TAG_URL = 1
_TAG_HIERARCHIC = 2
_TAG_LOCAL = 3


@dataclass
class UlContext:
    """Tracks the previous UL in a stream for same-as-before handling."""

    last_ul: UlRef | None = None


def canonical_ul_text(ul: UlRef) -> str:
    """Stable text form of an identity UL, used as registry key.

    Only full URLs and numeric hierarchic pointers identify a space on
    their own; the two context-dependent forms have no canonical text.
    """
    if isinstance(ul, FullUrl):
        return ul.url
    if isinstance(ul, NumericHierarchic):
        return "num:" + ".".join(str(s) for s in ul.path)
    raise ValueError(f"{type(ul).__name__} is not an identity UL")


def ul_from_text(text: str) -> UlRef:
    """Inverse of :func:`canonical_ul_text`, plus the two local forms.

    ``num:1.2.3`` parses as a hierarchic pointer, ``local:5`` as a local
    table index, and ``same`` as the same-as-before marker; anything else
    is taken as a full URL.
    """
    if text == "same":
        return SameAsBefore()
    if text.startswith("num:"):
        return NumericHierarchic(tuple(int(s) for s in text[4:].split(".")))
    if text.startswith("local:"):
        return LocalTableIndex(int(text[6:]))
    if not text:
        raise ValueError("empty UL text")
    return FullUrl(text)


def encode_ul(ul: UlRef, context: UlContext | None = None) -> bytes:
    """Encode a UL reference; updates ``context`` with the emitted UL."""
    if isinstance(ul, SameAsBefore):
        if context is None or context.last_ul is None:
            raise ContextMissing("same-as-before UL with no preceding UL")
        return bytes([_TAG_SAME])
    if isinstance(ul, FullUrl):
        if not ul.url:
            raise ValueError("full URL payload must be non-empty")
        out = bytes([_TAG_URL]) + encode_text(ul.url)
    elif isinstance(ul, NumericHierarchic):
        if not ul.path:
            raise ValueError("numeric hierarchic path must be non-empty")
        out = bytes([_TAG_HIERARCHIC]) + encode_uint(len(ul.path)) + b"".join(
            encode_uint(s) for s in ul.path
        )
    elif isinstance(ul, LocalTableIndex):
        out = bytes([_TAG_LOCAL]) + encode_uint(ul.index)
    else:
        raise TypeError(f"not a UL reference: {ul!r}")
    if context is not None:
        context.last_ul = ul
    return out


def decode_ul(data: bytes, offset: int = 0, context: UlContext | None = None) -> tuple[UlRef, int]:
    """Decode a UL reference at ``offset``.

    A same-as-before tag resolves to the previous UL recorded in
    ``context``, so callers always receive a concrete reference.
    """
    if offset >= len(data):
        raise Truncated("need at least 1 byte for UL tag")
    tag = data[offset]
    pos = offset + 1
    ul: UlRef
    if tag == _TAG_SAME:
        if context is None or context.last_ul is None:
            raise ContextMissing("same-as-before UL at stream start")
        return context.last_ul, 1
    if tag == _TAG_URL:
        url, n = decode_text(data, pos)
        if not url:
            raise SchemaMismatch("full URL payload must be non-empty")
        ul = FullUrl(url)
        pos += n
    elif tag == _TAG_HIERARCHIC:
        count, n = decode_uint(data, pos)
        pos += n
        if count == 0:
            raise SchemaMismatch("numeric hierarchic path must be non-empty")
        segments = []
        for _ in range(count):
            seg, n = decode_uint(data, pos)
            segments.append(seg)
            pos += n
        ul = NumericHierarchic(tuple(segments))
    elif tag == _TAG_LOCAL:
        index, n = decode_uint(data, pos)
        ul = LocalTableIndex(index)
        pos += n
    else:
        raise SchemaMismatch(f"unknown UL tag byte {tag}")
    if context is not None:
        context.last_ul = ul
    return ul, pos - offset


# ---------------------------------------------------------------------------
# Domain Vectors
# ---------------------------------------------------------------------------

Scalar = Union[int, Decimal, str]

# Wire kinds a dimension can declare. "decimal" covers money and both
# float representations; "timestamp" covers all date formats.
KIND_INTEGER = "integer"
KIND_LIST = "list"
KIND_DECIMAL = "decimal"
KIND_TIMESTAMP = "timestamp"
KIND_TEXT = "text"


class WireDimension(Protocol):
    """What the codec needs to know about one flattened dimension."""

    @property
    def wire_kind(self) -> str: ...

    @property
    def effective_scale(self) -> int: ...


@dataclass(frozen=True)
class DomainVector:
    """A UL naming the space plus one optional scalar per flattened dimension."""

    space: UlRef
    values: tuple[Scalar | None, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))

    def present(self) -> Iterable[int]:
        return (j for j, v in enumerate(self.values) if v is not None)


def encode_scalar(value: Scalar, kind: str, scale: int = 0) -> bytes:
    """Encode one present value per its dimension's wire kind."""
    if kind == KIND_INTEGER or kind == KIND_TIMESTAMP:
        if not isinstance(value, int):
            raise SchemaMismatch(f"{kind} dimension holds {type(value).__name__}")
        return encode_sint(value)
    if kind == KIND_LIST:
        if not isinstance(value, int) or value < 0:
            raise SchemaMismatch("list dimension requires a non-negative index")
        return encode_uint(value)
    if kind == KIND_DECIMAL:
        if isinstance(value, int):
            value = Decimal(value)
        if not isinstance(value, Decimal):
            raise SchemaMismatch(f"decimal dimension holds {type(value).__name__}")
        mantissa = value.scaleb(scale)
        if mantissa != mantissa.to_integral_value():
            raise SchemaMismatch(f"value {value} exceeds declared scale {scale}")
        return encode_sint(int(mantissa))
    if kind == KIND_TEXT:
        if not isinstance(value, str):
            raise SchemaMismatch(f"text dimension holds {type(value).__name__}")
        return encode_text(value)
    raise SchemaMismatch(f"unknown wire kind {kind!r}")


def decode_scalar(data: bytes, offset: int, kind: str, scale: int = 0) -> tuple[Scalar, int]:
    if kind == KIND_INTEGER or kind == KIND_TIMESTAMP:
        return decode_sint(data, offset)
    if kind == KIND_LIST:
        return decode_uint(data, offset)
    if kind == KIND_DECIMAL:
        mantissa, n = decode_sint(data, offset)
        return Decimal(mantissa).scaleb(-scale), n
    if kind == KIND_TEXT:
        return decode_text(data, offset)
    raise SchemaMismatch(f"unknown wire kind {kind!r}")


def encode_dv(
    dv: DomainVector,
    dims: Sequence[WireDimension],
    context: UlContext | None = None,
) -> bytes:
    """Encode a Domain Vector against the flattened dimensions of its space."""
    if len(dv.values) != len(dims):
        raise SchemaMismatch(
            f"vector has {len(dv.values)} slots, space flattens to {len(dims)}"
        )
    out = bytearray(encode_ul(dv.space, context))
    bitmap = bytearray((len(dims) + 7) // 8)
    for j, value in enumerate(dv.values):
        if value is not None:
            bitmap[j // 8] |= 1 << (j % 8)
    out += bitmap
    for j, value in enumerate(dv.values):
        if value is not None:
            out += encode_scalar(value, dims[j].wire_kind, dims[j].effective_scale)
    return bytes(out)


def decode_dv(
    data: bytes,
    dims: Sequence[WireDimension],
    context: UlContext | None = None,
    offset: int = 0,
) -> tuple[DomainVector, int]:
    """Decode a Domain Vector; exact inverse of :func:`encode_dv`."""
    space, n = decode_ul(data, offset, context)
    pos = offset + n
    bitmap_len = (len(dims) + 7) // 8
    if pos + bitmap_len > len(data):
        raise Truncated("presence bitmap truncated")
    bitmap = data[pos : pos + bitmap_len]
    for j in range(len(dims), bitmap_len * 8):
        if bitmap[j // 8] >> (j % 8) & 1:
            raise SchemaMismatch("presence bit set past the last dimension")
    pos += bitmap_len
    values: list[Scalar | None] = []
    for j in range(len(dims)):
        if bitmap[j // 8] >> (j % 8) & 1:
            value, n = decode_scalar(data, pos, dims[j].wire_kind, dims[j].effective_scale)
            values.append(value)
            pos += n
        else:
            values.append(None)
    return DomainVector(space, tuple(values)), pos - offset
