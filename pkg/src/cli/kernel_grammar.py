"""Inline kernel descriptions used by ``--kernel`` and config files.

Grammar::

    spec   := sum | stab | atom
    atom   := name [":" key "=" value ("," key "=" value)*]
    sum    := "sum[" [weight "*"] spec (";" [weight "*"] spec)* "]"
    stab   := "stab[" spec ";" spec ";" epsilon "]"

Names are the kernel kinds (``gaussian``, ``rq``, ``cramer``, ``elastic``,
``rgaussian``, ``rrq``). Cramer anchors are written ``z0=a|b|c``.
``format_kernel`` is the inverse: ``parse_kernel(format_kernel(k)) == k``.
"""

from __future__ import annotations

import re
from typing import Any

from pydantic import ValidationError

from src.framework.core.exceptions import ConfigError
from src.framework.core.kernels import KernelKind, KernelSpec, kernel_adapter

_WEIGHT = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*\*(.*)$", re.DOTALL)

_ATOM_KEYS: dict[str, set[str]] = {
    KernelKind.GAUSSIAN.value: {"sigma"},
    KernelKind.RESCALED_GAUSSIAN.value: {"sigma"},
    KernelKind.RATIONAL_QUADRATIC.value: {"alpha"},
    KernelKind.RESCALED_RQ.value: {"alpha"},
    KernelKind.CRAMER.value: {"z0"},
    KernelKind.ELASTIC.value: {"exponent", "r_min"},
}

_HINT = "e.g. gaussian:sigma=2, sum[rgaussian:sigma=4;rgaussian:sigma=8], stab[...;...;1.5]"


def _error(message: str, text: str) -> ConfigError:
    return ConfigError(f"{message} in kernel '{text}'", field="kernel", hint=_HINT)


def _split_top_level(body: str, text: str) -> list[str]:
    """Split on ';' outside nested brackets."""
    parts: list[str] = []
    depth = 0
    start = 0
    for i, ch in enumerate(body):
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
            if depth < 0:
                raise _error("unbalanced ']'", text)
        elif ch == ";" and depth == 0:
            parts.append(body[start:i])
            start = i + 1
    if depth != 0:
        raise _error("unbalanced '['", text)
    parts.append(body[start:])
    return [p.strip() for p in parts]


def _number(value: str, key: str, text: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise _error(f"'{key}' expects a number, got '{value}'", text) from None


def _atom(spec: str, text: str) -> dict[str, Any]:
    name, _, params = spec.partition(":")
    name = name.strip().lower()
    if name not in _ATOM_KEYS:
        raise _error(f"unknown kernel name '{name}'", text)
    data: dict[str, Any] = {"kind": name}
    if not params.strip():
        return data
    for item in params.split(","):
        key, sep, value = item.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise _error(f"expected key=value, got '{item.strip()}'", text)
        if key not in _ATOM_KEYS[name]:
            raise _error(f"'{name}' has no parameter '{key}'", text)
        if key == "z0":
            data[key] = tuple(_number(c, key, text) for c in value.split("|"))
        else:
            data[key] = _number(value, key, text)
    return data


def _bracketed(spec: str, prefix: str) -> str | None:
    if spec.lower().startswith(prefix + "[") and spec.endswith("]"):
        return spec[len(prefix) + 1 : -1]
    return None


def _to_data(spec: str, text: str) -> dict[str, Any]:
    spec = spec.strip()
    if not spec:
        raise _error("empty kernel description", text)

    body = _bracketed(spec, KernelKind.SUM.value)
    if body is not None:
        terms = []
        for part in _split_top_level(body, text):
            weight = 1.0
            match = _WEIGHT.match(part)
            if match:
                weight = _number(match.group(1), "weight", text)
                part = match.group(2)
            terms.append({"weight": weight, "kernel": _to_data(part, text)})
        return {"kind": KernelKind.SUM.value, "terms": terms}

    body = _bracketed(spec, KernelKind.STABILIZED.value)
    if body is not None:
        parts = _split_top_level(body, text)
        if len(parts) != 3:
            raise _error("stab[...] takes base;stabilizer;epsilon", text)
        return {
            "kind": KernelKind.STABILIZED.value,
            "base": _to_data(parts[0], text),
            "stabilizer": _to_data(parts[1], text),
            "epsilon": _number(parts[2], "epsilon", text),
        }

    if "[" in spec or "]" in spec:
        raise _error("brackets are only valid after 'sum' or 'stab'", text)
    return _atom(spec, text)


def parse_kernel(text: str) -> KernelSpec:
    """Parse an inline kernel description.

    Raises:
        ConfigError: On syntax errors or invalid parameter values.
    """
    data = _to_data(text, text)
    try:
        return kernel_adapter.validate_python(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(p) for p in first["loc"])
        raise ConfigError(
            f"{first['msg']} at {where} in kernel '{text}'", field="kernel", hint=_HINT
        ) from exc


def format_kernel(k: KernelSpec) -> str:
    return k.label()
