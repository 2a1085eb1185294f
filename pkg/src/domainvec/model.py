"""Domain Space definitions: dimensions, nesting, versions, validation.

A Domain Space is published as a versioned, UL-identified definition whose
components are either leaf dimensions or references to other spaces
(nesting). Flattening expands nested references depth-first into the list
of leaf dimensions a Domain Vector's value slots align with. Each leaf
keeps the identity of the space that originally defined it, so the same
quantity stays searchable across every space that reuses it.

Versioning is append-only: a later version may only add components at the
end. Old vectors therefore remain decodable forever, and flattened indices
never shift.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from decimal import Decimal
from typing import Callable, Iterator, Mapping, Optional, Sequence, Union

from . import codec
from .codec import DomainVector, Scalar, UlContext, UlRef
from .errors import CycleDetected, SchemaMismatch, Truncated, UnresolvedReference

REFERENCE_LANGUAGE = "en"

# Representation kinds selectable for a dimension.
REP_LIST = "list"
REP_TEXT = "text"
REP_INTEGER = "integer"
REP_MONEY = "money"
REP_FLOAT_MEDIUM = "float_medium"
REP_FLOAT_MAX = "float_max"

REPRESENTATIONS = (REP_LIST, REP_TEXT, REP_INTEGER, REP_MONEY, REP_FLOAT_MEDIUM, REP_FLOAT_MAX)

_DECIMAL_REPS = {REP_MONEY, REP_FLOAT_MEDIUM, REP_FLOAT_MAX}
_DEFAULT_SCALE = {REP_MONEY: 2, REP_FLOAT_MEDIUM: 6, REP_FLOAT_MAX: 15}

# Calendar precisions a date/time dimension can declare. The wire value is
# an integer count of the named unit (epoch-relative for calendar formats,
# midnight-relative for time-of-day formats).
DATE_FORMATS = (
    "yyyy-mm-dd hh:mm:ss",
    "yyyy-mm-dd hh:mm",
    "yyyy-mm-dd hh",
    "yyyy-mm-dd",
    "yyyy-mm",
    "yyyy",
    "hh:mm:ss",
    "hh:mm",
)


@dataclass(frozen=True)
class DimensionDefinition:
    """One leaf dimension of a Domain Space (the fields of its input form)."""

    keyword: str
    representation: str = REP_INTEGER
    keyword_link: Optional[str] = None
    unit: Optional[str] = None
    unit_link: Optional[str] = None
    comment: Optional[str] = None
    min: Optional[Scalar] = None
    max: Optional[Scalar] = None
    weight: Decimal = Decimal(1)
    date_format: Optional[str] = None
    required: bool = False
    enum_labels: Optional[tuple[Mapping[str, str], ...]] = None
    scale: Optional[int] = None

    def __post_init__(self):
        if self.enum_labels is not None:
            object.__setattr__(
                self, "enum_labels", tuple(dict(m) for m in self.enum_labels)
            )
        if not isinstance(self.weight, Decimal):
            object.__setattr__(self, "weight", Decimal(str(self.weight)))

    @property
    def wire_kind(self) -> str:
        if self.date_format is not None:
            return codec.KIND_TIMESTAMP
        if self.representation == REP_LIST:
            return codec.KIND_LIST
        if self.representation == REP_TEXT:
            return codec.KIND_TEXT
        if self.representation in _DECIMAL_REPS:
            return codec.KIND_DECIMAL
        return codec.KIND_INTEGER

    @property
    def effective_scale(self) -> int:
        if self.representation == REP_MONEY:
            return 2
        if self.scale is not None:
            return self.scale
        return _DEFAULT_SCALE.get(self.representation, 0)

    @property
    def comparable(self) -> bool:
        """Text dimensions never take part in distance or statistics."""
        return self.wire_kind != codec.KIND_TEXT


@dataclass(frozen=True)
class NestedSpace:
    """Reuse of another space's definition as a block of dimensions."""

    space: UlRef
    version_pin: Optional[int] = None
    label: str = ""


SpaceComponent = Union[DimensionDefinition, NestedSpace]


@dataclass(frozen=True)
class DomainDefinition:
    """Versioned, UL-identified schema of a Domain Space."""

    ul: UlRef
    version: int
    name: Mapping[str, str]
    components: tuple[SpaceComponent, ...]
    created: int = 0  # epoch seconds

    def __post_init__(self):
        object.__setattr__(self, "name", dict(self.name))
        object.__setattr__(self, "components", tuple(self.components))


@dataclass(frozen=True)
class GlobalDimensionId:
    """Identity of a dimension: the space that defined it and its index there.

    Two flattened slots refer to the same searchable quantity exactly when
    their ids are equal, however deeply the defining space is nested.
    """

    origin_space: str  # canonical UL text
    origin_index: int

    def text(self) -> str:
        return f"{self.origin_index}@{self.origin_space}"

    @classmethod
    def from_text(cls, text: str) -> "GlobalDimensionId":
        index, _, space = text.partition("@")
        if not space:
            raise ValueError(f"not a dimension id: {text!r}")
        return cls(space, int(index))


@dataclass(frozen=True)
class FlattenedDimension:
    path: tuple[int, ...]
    gid: GlobalDimensionId
    dim: DimensionDefinition

    # Convenience pass-throughs so a flattened list satisfies the codec's
    # dimension protocol directly.
    @property
    def wire_kind(self) -> str:
        return self.dim.wire_kind

    @property
    def effective_scale(self) -> int:
        return self.dim.effective_scale


# A resolver maps (ul, pinned version or None for latest) to a definition.
Resolver = Callable[[UlRef, Optional[int]], DomainDefinition]


def flatten(
    definition: DomainDefinition,
    resolver: Optional[Resolver] = None,
) -> list[FlattenedDimension]:
    """Expand nesting depth-first into the ordered list of leaf dimensions."""
    out: list[FlattenedDimension] = []
    _flatten_into(definition, resolver, out, (), [codec.canonical_ul_text(definition.ul)])
    return out


def _flatten_into(
    definition: DomainDefinition,
    resolver: Optional[Resolver],
    out: list[FlattenedDimension],
    prefix: tuple[int, ...],
    stack: list[str],
) -> int:
    # A dimension's identity index is its position within the flattening of
    # the space that defines it, so nested blocks count toward it too.
    own_ul = stack[-1]
    local = 0
    for i, component in enumerate(definition.components):
        if isinstance(component, DimensionDefinition):
            out.append(
                FlattenedDimension(prefix + (i,), GlobalDimensionId(own_ul, local), component)
            )
            local += 1
            continue
        if resolver is None:
            raise UnresolvedReference(f"nested space in {own_ul} but no resolver given")
        try:
            child = resolver(component.space, component.version_pin)
        except (CycleDetected, UnresolvedReference):
            raise
        except Exception as exc:
            raise UnresolvedReference(
                f"cannot resolve {codec.canonical_ul_text(component.space)}: {exc}"
            ) from exc
        child_ul = codec.canonical_ul_text(child.ul)
        if child_ul in stack:
            raise CycleDetected(" -> ".join(stack + [child_ul]))
        stack.append(child_ul)
        local += _flatten_into(child, resolver, out, prefix + (i,), stack)
        stack.pop()
    return local


def iter_dimensions(definition: DomainDefinition) -> Iterator[DimensionDefinition]:
    for component in definition.components:
        if isinstance(component, DimensionDefinition):
            yield component


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def _check_label_map(labels: Mapping[str, str], what: str, out: list[str]) -> None:
    if not labels:
        out.append(f"{what}: label map is empty")
    elif REFERENCE_LANGUAGE not in labels:
        out.append(f"{what}: missing reference language '{REFERENCE_LANGUAGE}' entry")


def _scalar_kind_ok(value: Scalar, kind: str) -> bool:
    if kind in (codec.KIND_INTEGER, codec.KIND_TIMESTAMP, codec.KIND_LIST):
        return isinstance(value, int)
    if kind == codec.KIND_DECIMAL:
        return isinstance(value, (int, Decimal))
    return isinstance(value, str)


def validate_dimension(dim: DimensionDefinition, where: str) -> list[str]:
    out: list[str] = []
    if not dim.keyword:
        out.append(f"{where}: keyword must be non-empty")
    if dim.representation not in REPRESENTATIONS:
        out.append(f"{where}: unknown representation {dim.representation!r}")
        return out
    if dim.weight <= 0:
        out.append(f"{where}: weight must be positive")
    if dim.date_format is not None:
        if dim.date_format not in DATE_FORMATS:
            out.append(f"{where}: unknown date format {dim.date_format!r}")
        if dim.representation != REP_INTEGER:
            out.append(f"{where}: date dimensions use the integer representation")
    if dim.representation == REP_LIST:
        if not dim.enum_labels:
            out.append(f"{where}: list representation requires enum_labels")
        else:
            for i, labels in enumerate(dim.enum_labels):
                _check_label_map(labels, f"{where}: enum label {i}", out)
    elif dim.enum_labels is not None:
        out.append(f"{where}: enum_labels only apply to list dimensions")
    if dim.scale is not None:
        if dim.representation not in (REP_FLOAT_MEDIUM, REP_FLOAT_MAX):
            out.append(f"{where}: scale only applies to float dimensions")
        elif dim.scale < 0:
            out.append(f"{where}: scale must be non-negative")
    kind = dim.wire_kind
    if kind == codec.KIND_TEXT:
        if dim.min is not None or dim.max is not None:
            out.append(f"{where}: text dimensions take no bounds")
    else:
        for bound, value in (("min", dim.min), ("max", dim.max)):
            if value is not None and not _scalar_kind_ok(value, kind):
                out.append(f"{where}: {bound} has wrong type for {kind} dimension")
        if (
            dim.min is not None
            and dim.max is not None
            and _scalar_kind_ok(dim.min, kind)
            and _scalar_kind_ok(dim.max, kind)
            and dim.min > dim.max
        ):
            out.append(f"{where}: min must not exceed max")
    if kind == codec.KIND_LIST and dim.enum_labels:
        for bound, value in (("min", dim.min), ("max", dim.max)):
            if isinstance(value, int) and not 0 <= value < len(dim.enum_labels):
                out.append(f"{where}: {bound} outside the label range")
    return out


def validate_definition(
    definition: DomainDefinition,
    resolver: Optional[Resolver] = None,
) -> list[str]:
    """Check every schema invariant; returns all violations, not the first."""
    out: list[str] = []
    if not isinstance(definition.ul, (codec.FullUrl, codec.NumericHierarchic)):
        out.append("space UL must be a full URL or numeric hierarchic pointer")
    if definition.version < 1:
        out.append("version must be at least 1")
    _check_label_map(definition.name, "name", out)
    for i, component in enumerate(definition.components):
        if isinstance(component, DimensionDefinition):
            out.extend(validate_dimension(component, f"component {i}"))
        elif not isinstance(component.space, (codec.FullUrl, codec.NumericHierarchic)):
            out.append(f"component {i}: nested reference must be an identity UL")
    if not out:
        try:
            flat = flatten(definition, resolver)
        except CycleDetected as exc:
            out.append(f"nesting cycle: {exc}")
        except UnresolvedReference as exc:
            out.append(str(exc))
        else:
            if not flat:
                out.append("space must flatten to at least one dimension")
    return out


def check_append_only(previous: DomainDefinition, candidate: DomainDefinition) -> list[str]:
    """Violations of the append-only versioning rule, if any."""
    out: list[str] = []
    if candidate.version != previous.version + 1:
        out.append(
            f"next version must be {previous.version + 1}, got {candidate.version}"
        )
    shared = candidate.components[: len(previous.components)]
    if len(candidate.components) < len(previous.components):
        out.append("a new version may not drop components")
    elif shared != previous.components:
        out.append("existing components and their order are immutable across versions")
    return out


def validate_dv(dv: DomainVector, flat: Sequence[FlattenedDimension]) -> list[str]:
    """Check a vector's slots against the flattened dimensions of its space."""
    out: list[str] = []
    if len(dv.values) != len(flat):
        out.append(f"expected {len(flat)} value slots, got {len(dv.values)}")
        return out
    for j, (value, fd) in enumerate(zip(dv.values, flat)):
        dim = fd.dim
        where = f"dimension {j} ({dim.keyword})"
        if value is None:
            if dim.required:
                out.append(f"{where}: required value is absent")
            continue
        kind = dim.wire_kind
        if not _scalar_kind_ok(value, kind):
            out.append(f"{where}: {type(value).__name__} does not fit {kind}")
            continue
        if kind == codec.KIND_LIST:
            assert dim.enum_labels is not None
            if not 0 <= value < len(dim.enum_labels):
                out.append(f"{where}: index {value} outside {len(dim.enum_labels)} labels")
        if kind == codec.KIND_DECIMAL:
            quantum = Decimal(1).scaleb(-dim.effective_scale)
            if Decimal(value) % quantum != 0:
                out.append(f"{where}: value {value} exceeds scale {dim.effective_scale}")
        if kind != codec.KIND_TEXT:
            if dim.min is not None and value < dim.min:
                out.append(f"{where}: value {value} below min {dim.min}")
            if dim.max is not None and value > dim.max:
                out.append(f"{where}: value {value} above max {dim.max}")
        try:
            codec.encode_scalar(value, kind, dim.effective_scale)
        except Exception as exc:
            out.append(f"{where}: not encodable: {exc}")
    return out


# ---------------------------------------------------------------------------
# Information content
# ---------------------------------------------------------------------------

UNBOUNDED = math.inf


def dimension_domain_size(dim: DimensionDefinition) -> Optional[int]:
    """Count of distinct values a dimension admits, or None if unbounded.

    Integers and date counts step by 1, decimals by their scale quantum,
    and list dimensions are sized by their label count. Text dimensions
    have no finite domain and are excluded from accounting altogether.
    """
    kind = dim.wire_kind
    if kind == codec.KIND_LIST:
        return len(dim.enum_labels or ())
    if kind == codec.KIND_TEXT:
        return None
    if dim.min is None or dim.max is None:
        return None
    if kind == codec.KIND_DECIMAL:
        span = (Decimal(dim.max) - Decimal(dim.min)).scaleb(dim.effective_scale)
        return int(span) + 1
    return int(dim.max) - int(dim.min) + 1


def information_content(
    definition: DomainDefinition,
    resolver: Optional[Resolver] = None,
) -> float:
    """Total selectable information in bits: sum of log2(domain size).

    Returns ``math.inf`` when any counted dimension lacks finite bounds.
    """
    bits = 0.0
    for fd in flatten(definition, resolver):
        if fd.dim.wire_kind == codec.KIND_TEXT:
            continue
        size = dimension_domain_size(fd.dim)
        if size is None:
            return UNBOUNDED
        if size <= 0:
            return UNBOUNDED
        bits += math.log2(size)
    return bits


# ---------------------------------------------------------------------------
# Canonical binary form and content hash
# ---------------------------------------------------------------------------

_COMPONENT_DIM = 0
_COMPONENT_NESTED = 1


def _encode_opt_text(value: Optional[str]) -> bytes:
    if value is None:
        return b"\x00"
    return b"\x01" + codec.encode_text(value)


def _decode_opt_text(data: bytes, pos: int) -> tuple[Optional[str], int]:
    if data[pos] == 0:
        return None, pos + 1
    value, n = codec.decode_text(data, pos + 1)
    return value, pos + 1 + n


def _encode_label_map(labels: Mapping[str, str]) -> bytes:
    out = bytearray(codec.encode_uint(len(labels)))
    for tag in sorted(labels):
        out += codec.encode_text(tag)
        out += codec.encode_text(labels[tag])
    return bytes(out)


def _decode_label_map(data: bytes, pos: int) -> tuple[dict[str, str], int]:
    count, n = codec.decode_uint(data, pos)
    pos += n
    labels: dict[str, str] = {}
    for _ in range(count):
        tag, n = codec.decode_text(data, pos)
        pos += n
        text, n = codec.decode_text(data, pos)
        pos += n
        labels[tag] = text
    return labels, pos


def _encode_opt_scalar(value: Optional[Scalar], kind: str, scale: int) -> bytes:
    if value is None:
        return b"\x00"
    return b"\x01" + codec.encode_scalar(value, kind, scale)


def _decode_opt_scalar(data: bytes, pos: int, kind: str, scale: int) -> tuple[Optional[Scalar], int]:
    if data[pos] == 0:
        return None, pos + 1
    value, n = codec.decode_scalar(data, pos + 1, kind, scale)
    return value, pos + 1 + n


def _encode_dimension(dim: DimensionDefinition) -> bytes:
    # Scale precedes the bounds so a decoder knows the decimal quantum
    # before it reads them.
    out = bytearray()
    out += codec.encode_text(dim.keyword)
    out += _encode_opt_text(dim.keyword_link)
    out += _encode_opt_text(dim.unit)
    out += _encode_opt_text(dim.unit_link)
    out += _encode_opt_text(dim.comment)
    out += codec.encode_uint(REPRESENTATIONS.index(dim.representation))
    if dim.date_format is None:
        out += b"\x00"
    else:
        out += b"\x01" + codec.encode_uint(DATE_FORMATS.index(dim.date_format))
    out += codec.encode_text(str(dim.weight))
    out += b"\x01" if dim.required else b"\x00"
    if dim.scale is None:
        out += b"\x00"
    else:
        out += b"\x01" + codec.encode_uint(dim.scale)
    kind, scale = dim.wire_kind, dim.effective_scale
    out += _encode_opt_scalar(dim.min, kind, scale)
    out += _encode_opt_scalar(dim.max, kind, scale)
    if dim.enum_labels is None:
        out += b"\x00"
    else:
        out += b"\x01" + codec.encode_uint(len(dim.enum_labels))
        for labels in dim.enum_labels:
            out += _encode_label_map(labels)
    return bytes(out)


def _decode_dimension(data: bytes, pos: int) -> tuple[DimensionDefinition, int]:
    keyword, n = codec.decode_text(data, pos)
    pos += n
    keyword_link, pos = _decode_opt_text(data, pos)
    unit, pos = _decode_opt_text(data, pos)
    unit_link, pos = _decode_opt_text(data, pos)
    comment, pos = _decode_opt_text(data, pos)
    rep_idx, n = codec.decode_uint(data, pos)
    pos += n
    representation = REPRESENTATIONS[rep_idx]
    date_format = None
    if data[pos] == 1:
        fmt_idx, n = codec.decode_uint(data, pos + 1)
        date_format = DATE_FORMATS[fmt_idx]
        pos += 1 + n
    else:
        pos += 1
    weight_text, n = codec.decode_text(data, pos)
    pos += n
    required = data[pos] == 1
    pos += 1
    scale = None
    if data[pos] == 1:
        scale, n = codec.decode_uint(data, pos + 1)
        pos += 1 + n
    else:
        pos += 1
    probe = DimensionDefinition(keyword, representation, date_format=date_format, scale=scale)
    kind, eff_scale = probe.wire_kind, probe.effective_scale
    vmin, pos = _decode_opt_scalar(data, pos, kind, eff_scale)
    vmax, pos = _decode_opt_scalar(data, pos, kind, eff_scale)
    enum_labels = None
    if data[pos] == 1:
        count, n = codec.decode_uint(data, pos + 1)
        pos += 1 + n
        maps = []
        for _ in range(count):
            labels, pos = _decode_label_map(data, pos)
            maps.append(labels)
        enum_labels = tuple(maps)
    else:
        pos += 1
    dim = DimensionDefinition(
        keyword=keyword,
        representation=representation,
        keyword_link=keyword_link,
        unit=unit,
        unit_link=unit_link,
        comment=comment,
        min=vmin,
        max=vmax,
        weight=Decimal(weight_text),
        date_format=date_format,
        required=required,
        enum_labels=enum_labels,
        scale=scale,
    )
    return dim, pos


def canonical_bytes(definition: DomainDefinition) -> bytes:
    """Deterministic binary form of a definition, version number first.

    This is the content the space's UL points at; equal definitions always
    produce identical bytes. The UL itself is carried by the surrounding
    context (registry key, export stream, or hash input), not repeated here.
    """
    out = bytearray()
    out += codec.encode_uint(definition.version)
    out += codec.encode_sint(definition.created)
    out += _encode_label_map(definition.name)
    out += codec.encode_uint(len(definition.components))
    for component in definition.components:
        if isinstance(component, DimensionDefinition):
            out += bytes([_COMPONENT_DIM]) + _encode_dimension(component)
        else:
            out += bytes([_COMPONENT_NESTED])
            out += codec.encode_ul(component.space)
            if component.version_pin is None:
                out += b"\x00"
            else:
                out += b"\x01" + codec.encode_uint(component.version_pin)
            out += codec.encode_text(component.label)
    return bytes(out)


def definition_from_bytes(data: bytes, ul: UlRef) -> DomainDefinition:
    """Parse :func:`canonical_bytes` output back into a definition."""
    try:
        version, n = codec.decode_uint(data, 0)
        pos = n
        created, n = codec.decode_sint(data, pos)
        pos += n
        name, pos = _decode_label_map(data, pos)
        count, n = codec.decode_uint(data, pos)
        pos += n
        components: list[SpaceComponent] = []
        for _ in range(count):
            tag = data[pos]
            pos += 1
            if tag == _COMPONENT_DIM:
                dim, pos = _decode_dimension(data, pos)
                components.append(dim)
            elif tag == _COMPONENT_NESTED:
                space, n = codec.decode_ul(data, pos)
                pos += n
                pin = None
                if data[pos] == 1:
                    pin, n = codec.decode_uint(data, pos + 1)
                    pos += 1 + n
                else:
                    pos += 1
                label, n = codec.decode_text(data, pos)
                pos += n
                components.append(NestedSpace(space, pin, label))
            else:
                raise SchemaMismatch(f"unknown component tag {tag}")
    except IndexError as exc:
        raise Truncated("definition bytes ended early") from exc
    if pos != len(data):
        raise SchemaMismatch(f"{len(data) - pos} trailing bytes after definition")
    return DomainDefinition(ul, version, name, tuple(components), created)


def content_hash(definition: DomainDefinition) -> bytes:
    """SHA-256 over the identity UL plus the canonical definition bytes."""
    h = hashlib.sha256()
    h.update(codec.encode_ul(definition.ul))
    h.update(canonical_bytes(definition))
    return h.digest()


# ---------------------------------------------------------------------------
# Date / time value helpers
# ---------------------------------------------------------------------------

_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)


def parse_date_value(text: str, date_format: str) -> int:
    """Parse a formatted date/time string into its unit count."""
    if date_format == "hh:mm:ss":
        h, m, s = (int(p) for p in text.split(":"))
        return h * 3600 + m * 60 + s
    if date_format == "hh:mm":
        h, m = (int(p) for p in text.split(":"))
        return h * 60 + m
    if date_format == "yyyy":
        return int(text) - 1970
    if date_format == "yyyy-mm":
        y, mo = (int(p) for p in text.split("-"))
        return (y - 1970) * 12 + (mo - 1)
    py_format = {
        "yyyy-mm-dd hh:mm:ss": "%Y-%m-%d %H:%M:%S",
        "yyyy-mm-dd hh:mm": "%Y-%m-%d %H:%M",
        "yyyy-mm-dd hh": "%Y-%m-%d %H",
        "yyyy-mm-dd": "%Y-%m-%d",
    }[date_format]
    moment = datetime.strptime(text, py_format).replace(tzinfo=timezone.utc)
    seconds = int((moment - _EPOCH).total_seconds())
    divisor = {"yyyy-mm-dd hh:mm:ss": 1, "yyyy-mm-dd hh:mm": 60,
               "yyyy-mm-dd hh": 3600, "yyyy-mm-dd": 86400}[date_format]
    return seconds // divisor


def format_date_value(count: int, date_format: str) -> str:
    """Render a unit count back into its declared format."""
    if date_format == "hh:mm:ss":
        return f"{count // 3600:02d}:{count % 3600 // 60:02d}:{count % 60:02d}"
    if date_format == "hh:mm":
        return f"{count // 60:02d}:{count % 60:02d}"
    if date_format == "yyyy":
        return f"{count + 1970:04d}"
    if date_format == "yyyy-mm":
        y, mo = divmod(count, 12)
        return f"{y + 1970:04d}-{mo + 1:02d}"
    multiplier = {"yyyy-mm-dd hh:mm:ss": 1, "yyyy-mm-dd hh:mm": 60,
                  "yyyy-mm-dd hh": 3600, "yyyy-mm-dd": 86400}[date_format]
    moment = _EPOCH + timedelta(seconds=count * multiplier)
    py_format = {
        "yyyy-mm-dd hh:mm:ss": "%Y-%m-%d %H:%M:%S",
        "yyyy-mm-dd hh:mm": "%Y-%m-%d %H:%M",
        "yyyy-mm-dd hh": "%Y-%m-%d %H",
        "yyyy-mm-dd": "%Y-%m-%d",
    }[date_format]
    return moment.strftime(py_format)
