"""JSON encoding of subgroups, finite groups and metric parameters."""

import json
from pathlib import Path
from typing import Any, Union

from .chabauty_metric import MetricParams
from .errors import SchemaError
from .exact_linalg import format_fraction, to_fraction
from .finite_lattice import FiniteAbelianGroup, FinSubgroup
from .subgroup_calculus import AmbientGroup, ElementarySubgroup, from_generators


def load_json(source: Union[str, Path]) -> Any:
    """Parse inline JSON text, or read it from a file path."""
    text = str(source)
    if not text.lstrip().startswith(("{", "[")):
        path = Path(text)
        if not path.is_file():
            raise SchemaError(f"not JSON and not a readable file: {text}")
        text = path.read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc.msg}", {"line": exc.lineno, "column": exc.colno})


def _require(obj: Any, key: str, kind: type):
    if not isinstance(obj, dict) or key not in obj:
        raise SchemaError(f"missing field '{key}'")
    value = obj[key]
    if not isinstance(value, kind) or isinstance(value, bool):
        raise SchemaError(f"field '{key}' must be {kind.__name__}")
    return value


def _rational(value: Any):
    if isinstance(value, float):
        raise SchemaError(f"rationals must be integers or 'p/q' strings, got {value!r}")
    return to_fraction(value)


def ambient_from_dict(obj: Any) -> AmbientGroup:
    finite = obj.get("finite", []) if isinstance(obj, dict) else []
    if not isinstance(finite, list) or not all(isinstance(n, int) for n in finite):
        raise SchemaError("field 'finite' must be a list of integers")
    return AmbientGroup(_require(obj, "a", int), _require(obj, "b", int), _require(obj, "c", int), tuple(finite))


def subgroup_from_dict(obj: Any) -> ElementarySubgroup:
    ambient = ambient_from_dict(_require(obj, "ambient", dict))
    columns = {}
    for key in ("cont", "disc"):
        raw = obj.get(key, [])
        if not isinstance(raw, list) or not all(isinstance(col, list) for col in raw):
            raise SchemaError(f"field '{key}' must be a list of coordinate lists")
        for col in raw:
            if len(col) != ambient.dim:
                raise SchemaError(f"'{key}' column has {len(col)} coordinates, ambient needs {ambient.dim}")
        columns[key] = [[_rational(x) for x in col] for col in raw]
    return from_generators(ambient, columns["cont"], columns["disc"])


def subgroup_to_dict(h: ElementarySubgroup) -> dict:
    return {
        "ambient": h.ambient.to_dict(),
        "cont": [[format_fraction(x) for x in col] for col in h.cont_gens.columns()],
        "disc": [[format_fraction(x) for x in col] for col in h.disc_gens.columns()],
        "canonical": True,
    }


def finite_group_from_dict(obj: Any) -> FiniteAbelianGroup:
    factors = _require(obj, "invariant_factors", list)
    if not all(isinstance(d, int) and not isinstance(d, bool) for d in factors):
        raise SchemaError("invariant factors must be integers")
    return FiniteAbelianGroup(tuple(factors))


def fin_subgroup_to_dict(h: FinSubgroup) -> dict:
    return h.to_dict()


def params_from_dict(obj: Any, net_cap: int = None) -> MetricParams:
    if not isinstance(obj, dict):
        raise SchemaError("metric parameters must be an object")
    r_cut = _rational(obj.get("r_cut", "8"))
    delta = _rational(obj.get("delta", "1/40"))
    if net_cap is None:
        return MetricParams(r_cut, delta)
    return MetricParams(r_cut, delta, net_cap)
