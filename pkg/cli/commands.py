"""Command implementations; each returns a JSON-ready value or a report."""

from typing import Any, Optional

from core.chabauty_metric import chabauty_distance
from core.codec import (
    fin_subgroup_to_dict,
    finite_group_from_dict,
    load_json,
    params_from_dict,
    subgroup_from_dict,
    subgroup_to_dict,
)
from core.config import ConfigManager, RunConfig
from core.descriptor import classify, parse_descriptor
from core.errors import SchemaError
from core.finite_lattice import enumerate_subgroups, orthogonal_fin, subgroups_by_closure
from core.report import VerificationReport
from core.subgroup_calculus import orthogonal

from .suites import run_suite


def cmd_dual(source: str) -> dict:
    """Canonical orthogonal of a subgroup given as JSON text or a file."""
    return subgroup_to_dict(orthogonal(subgroup_from_dict(load_json(source))))


def cmd_classify(text: str) -> dict:
    return classify(parse_descriptor(text), label=text)


def cmd_distance(left: str, right: str, config: RunConfig) -> dict:
    h = subgroup_from_dict(load_json(left))
    k = subgroup_from_dict(load_json(right))
    return chabauty_distance(h, k, config.metric_params()).to_dict()


def cmd_enumerate(source: str, config: RunConfig) -> dict:
    """Full subgroup lattice with the orthogonal pairing table."""
    group = finite_group_from_dict(load_json(source))
    lattice = enumerate_subgroups(group, config.enumeration_cap)
    position = {h: i for i, h in enumerate(lattice)}
    out: dict[str, Any] = {
        "invariant_factors": list(group.invariant_factors),
        "order": group.order,
        "count": len(lattice),
        "subgroups": [fin_subgroup_to_dict(h) for h in lattice],
        "orthogonal": [position[orthogonal_fin(h)] for h in lattice],
    }
    if group.order <= 32:
        out["closure_count"] = len(subgroups_by_closure(group, config.enumeration_cap))
    return out


def cmd_verify(suite: str, config: RunConfig, progress: bool = False) -> VerificationReport:
    """Run a suite and persist its report to ``config.out``."""
    report = run_suite(suite, config, progress)
    report.write(config.out, config.format)
    return report


def load_params_override(source: str) -> dict:
    """Metric parameters given as JSON, mapped onto flag names."""
    params = params_from_dict(load_json(source))
    return {"r_cut": str(params.r_cut), "delta": str(params.delta)}


def cmd_config(manager: ConfigManager, overrides: dict, save: bool = False,
               import_path: Optional[str] = None, export_path: Optional[str] = None) -> dict:
    """Import, save and export in that order; returns the effective settings."""
    if import_path and not manager.import_config(import_path):
        raise SchemaError(f"cannot import config from {import_path}")
    valid, error = manager.resolve(overrides).validate()
    if not valid:
        raise SchemaError(error)
    if save:
        manager.persist(overrides)
    if export_path and not manager.export_config(export_path, overrides):
        raise SchemaError(f"cannot write config to {export_path}")
    return {"path": manager.config_path, "settings": manager.merged(overrides)}
