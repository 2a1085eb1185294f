"""JSON forms of definitions, vectors, queries, and statistics.

These mirror the definition form's field names (keyword, unit, min, max,
weight, representation, date_format, required, nested) and are the lossless
twin of the canonical binary form. Decimal-valued fields travel as strings
so nothing is ever forced through a float.
"""

from __future__ import annotations

from decimal import Decimal, InvalidOperation
from typing import Any, Mapping, Optional

from . import codec, model
from .codec import DomainVector, Scalar, UlRef
from .errors import SchemaMismatch
from .model import DimensionDefinition, DomainDefinition, NestedSpace, SpaceComponent


def scalar_to_json(value: Optional[Scalar]) -> Any:
    if value is None or isinstance(value, (int, str)):
        return value
    return str(value)  # Decimal


def scalar_from_json(value: Any, kind: str, scale: int = 0) -> Optional[Scalar]:
    """Coerce a JSON value into the scalar type its dimension kind expects."""
    if value is None:
        return None
    if kind in (codec.KIND_INTEGER, codec.KIND_TIMESTAMP, codec.KIND_LIST):
        if isinstance(value, bool) or not isinstance(value, int):
            raise SchemaMismatch(f"expected an integer for {kind}, got {value!r}")
        return value
    if kind == codec.KIND_DECIMAL:
        if isinstance(value, bool):
            raise SchemaMismatch(f"expected a decimal for {kind}, got {value!r}")
        if isinstance(value, (int, str)):
            try:
                return Decimal(value)
            except InvalidOperation as exc:
                raise SchemaMismatch(f"not a decimal: {value!r}") from exc
        if isinstance(value, float):
            # Accept floats from hand-written JSON, but pin them to the
            # dimension's quantum immediately.
            return Decimal(str(value)).quantize(Decimal(1).scaleb(-scale))
        raise SchemaMismatch(f"expected a decimal for {kind}, got {value!r}")
    if kind == codec.KIND_TEXT:
        if not isinstance(value, str):
            raise SchemaMismatch(f"expected text, got {value!r}")
        return value
    raise SchemaMismatch(f"unknown kind {kind!r}")


def dimension_to_json(dim: DimensionDefinition) -> dict:
    out: dict[str, Any] = {
        "keyword": dim.keyword,
        "representation": dim.representation,
        "weight": str(dim.weight),
        "required": dim.required,
    }
    for key in ("keyword_link", "unit", "unit_link", "comment", "date_format"):
        value = getattr(dim, key)
        if value is not None:
            out[key] = value
    if dim.min is not None:
        out["min"] = scalar_to_json(dim.min)
    if dim.max is not None:
        out["max"] = scalar_to_json(dim.max)
    if dim.scale is not None:
        out["scale"] = dim.scale
    if dim.enum_labels is not None:
        out["enum_labels"] = [dict(m) for m in dim.enum_labels]
    return out


def dimension_from_json(obj: Mapping[str, Any]) -> DimensionDefinition:
    representation = obj.get("representation", model.REP_INTEGER)
    probe = DimensionDefinition(
        keyword=obj.get("keyword", ""),
        representation=representation,
        date_format=obj.get("date_format"),
        scale=obj.get("scale"),
    )
    kind, scale = probe.wire_kind, probe.effective_scale
    enum_labels = obj.get("enum_labels")
    return DimensionDefinition(
        keyword=obj.get("keyword", ""),
        representation=representation,
        keyword_link=obj.get("keyword_link"),
        unit=obj.get("unit"),
        unit_link=obj.get("unit_link"),
        comment=obj.get("comment"),
        min=scalar_from_json(obj.get("min"), kind, scale),
        max=scalar_from_json(obj.get("max"), kind, scale),
        weight=Decimal(str(obj.get("weight", "1"))),
        date_format=obj.get("date_format"),
        required=bool(obj.get("required", False)),
        enum_labels=tuple(dict(m) for m in enum_labels) if enum_labels is not None else None,
        scale=obj.get("scale"),
    )


def component_to_json(component: SpaceComponent) -> dict:
    if isinstance(component, DimensionDefinition):
        return dimension_to_json(component)
    nested: dict[str, Any] = {"space": codec.canonical_ul_text(component.space)}
    if component.version_pin is not None:
        nested["version"] = component.version_pin
    if component.label:
        nested["label"] = component.label
    return {"nested": nested}


def component_from_json(obj: Mapping[str, Any]) -> SpaceComponent:
    if "nested" in obj:
        nested = obj["nested"]
        return NestedSpace(
            space=codec.ul_from_text(nested["space"]),
            version_pin=nested.get("version"),
            label=nested.get("label", ""),
        )
    return dimension_from_json(obj)


def definition_to_json(definition: DomainDefinition) -> dict:
    return {
        "ul": codec.canonical_ul_text(definition.ul),
        "version": definition.version,
        "name": dict(definition.name),
        "created": definition.created,
        "components": [component_to_json(c) for c in definition.components],
    }


def definition_from_json(obj: Mapping[str, Any]) -> DomainDefinition:
    if "ul" not in obj:
        raise SchemaMismatch("definition JSON needs a 'ul' field")
    return DomainDefinition(
        ul=codec.ul_from_text(obj["ul"]),
        version=int(obj.get("version", 0)),
        name=dict(obj.get("name", {})),
        components=tuple(component_from_json(c) for c in obj.get("components", [])),
        created=int(obj.get("created", 0)),
    )


def dv_to_json(dv: DomainVector) -> dict:
    return {
        "space": codec.canonical_ul_text(dv.space),
        "values": [scalar_to_json(v) for v in dv.values],
    }


def dv_from_json(obj: Mapping[str, Any], flat: list[model.FlattenedDimension]) -> DomainVector:
    raw = obj.get("values")
    if not isinstance(raw, list):
        raise SchemaMismatch("vector JSON needs a 'values' array")
    if len(raw) != len(flat):
        raise SchemaMismatch(f"expected {len(flat)} values, got {len(raw)}")
    values = tuple(
        scalar_from_json(v, fd.wire_kind, fd.effective_scale)
        for v, fd in zip(raw, flat)
    )
    return DomainVector(codec.ul_from_text(obj["space"]), values)
