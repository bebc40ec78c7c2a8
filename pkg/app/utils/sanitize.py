from __future__ import annotations

import json
from enum import Enum
from typing import Any, Mapping

from pydantic import BaseModel


def sanitize_json(obj: Any) -> Any:
    """
    Recursively convert a structure into plain JSON values with a stable shape.

    - Mappings are rebuilt with their keys sorted
    - Sets and frozensets become sorted lists, so iteration order never leaks
    - Enums collapse to their values, bytes to lowercase hex
    - Pydantic models are dumped first and then sanitized like any mapping
    """
    if obj is None:
        return None

    if isinstance(obj, BaseModel):
        return sanitize_json(obj.model_dump(mode="python"))

    if isinstance(obj, Enum):
        return sanitize_json(obj.value)

    if isinstance(obj, (bytes, bytearray)):
        return bytes(obj).hex()

    if isinstance(obj, Mapping):
        return {str(k): sanitize_json(obj[k]) for k in sorted(obj, key=str)}

    if isinstance(obj, (set, frozenset)):
        return sorted((sanitize_json(v) for v in obj), key=_sort_key)

    if isinstance(obj, (list, tuple)):
        return [sanitize_json(v) for v in obj]

    # Leave numbers, booleans and strings unchanged
    return obj


def dumps_line(obj: Any) -> str:
    """Serializes an already sanitized value as one compact JSON line."""
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=True)


def _sort_key(value: Any) -> str:
    if isinstance(value, str):
        return value
    return json.dumps(value, sort_keys=True)
