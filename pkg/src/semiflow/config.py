"""Suite configuration files.

A config is YAML::

    seed: 42                      # optional, overridden by --seed / SEMIFLOW_SEED
    suites:
      - name: resolvent-agreement
        spec:
          variant: exponential
          generator: {kind: random-lindblad, d: 3, kraus_terms: 2}
        params: {eps: 1.0e-9}
        tol: 1.0e-6

Matrices are either file paths in the matrix text format (resolved relative
to the config file) or one of the names ``identity``, ``sigma_x``,
``sigma_y``, ``sigma_z``, ``random``.  Unknown keys are rejected.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import yaml

__all__ = ["SUITE_NAMES", "ConfigError", "SuiteEntry", "SuiteConfig", "load_config", "parse_config"]

SUITE_NAMES = (
    "semigroup-law",
    "exp-bound",
    "wot-zero",
    "pettis",
    "commutation",
    "resolvent-agreement",
    "resolvent-equation",
    "difference-quotient",
    "closedness",
    "cp-unital",
    "gks-form",
    "omega-invariance",
)

SUITE_PARAMS = {
    "semigroup-law": {"t_grid"},
    "exp-bound": {"delta", "samples", "horizon", "verify_samples"},
    "wot-zero": {"a", "t_seq"},
    "pettis": {"a", "lambda", "eps", "adaptive_tol", "panels", "nodes_per_panel"},
    "commutation": {"a", "lambda", "eps", "superop"},
    "resolvent-agreement": {"lambda", "eps"},
    "resolvent-equation": {"lambda", "eps"},
    "difference-quotient": {"a", "h_seq", "richardson", "expected_order", "order_tol"},
    "closedness": {"lambda", "eps", "b_limit", "direction", "terms", "rate"},
    "cp-unital": {"t_grid"},
    "gks-form": set(),
    "omega-invariance": {"s_grid", "n_random"},
}

SPEC_KEYS = {
    "exponential": {"variant", "generator"},
    "conjugation": {"variant", "contraction"},
    "shift-example": {"variant", "n", "step"},
}

GENERATOR_KEYS = {
    "zero": {"kind", "d"},
    "dephasing": {"kind"},
    "lindblad": {"kind", "kraus", "hamiltonian"},
    "random-lindblad": {"kind", "d", "kraus_terms", "hamiltonian"},
    "matrix": {"kind", "path"},
}

CONTRACTION_KEYS = {
    "matrix-group": {"kind", "k"},
    "cyclic-shift": {"kind", "d", "step"},
    "truncated-shift": {"kind", "d", "step"},
}


class ConfigError(ValueError):
    """Unparseable or invalid configuration; the message names the location or field."""


@dataclass
class SuiteEntry:
    name: str
    spec: dict
    params: dict = field(default_factory=dict)
    tol: float = 1e-8


@dataclass
class SuiteConfig:
    suites: list
    seed: int | None = None
    base_dir: str = "."


def _check_keys(mapping, allowed, where):
    if not isinstance(mapping, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(mapping).__name__}")
    unknown = sorted(set(mapping) - set(allowed))
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(map(repr, unknown))}")


def _check_kind(mapping, table, key, where):
    _check_keys(mapping, set().union(*table.values()), where)
    kind = mapping.get(key)
    if kind not in table:
        raise ConfigError(f"{where}.{key}: unknown value {kind!r}; expected one of {sorted(table)}")
    _check_keys(mapping, table[kind], where)


def _validate_spec(spec, where):
    if not isinstance(spec, dict):
        raise ConfigError(f"{where}: expected a mapping")
    _check_kind(spec, SPEC_KEYS, "variant", where)
    variant = spec["variant"]
    if variant == "exponential":
        if "generator" not in spec:
            raise ConfigError(f"{where}.generator: required")
        _check_kind(spec["generator"], GENERATOR_KEYS, "kind", f"{where}.generator")
    elif variant == "conjugation":
        if "contraction" not in spec:
            raise ConfigError(f"{where}.contraction: required")
        _check_kind(spec["contraction"], CONTRACTION_KEYS, "kind", f"{where}.contraction")
    else:
        for key in ("n", "step"):
            if key not in spec:
                raise ConfigError(f"{where}.{key}: required")


def parse_config(text, source="<string>", base_dir="."):
    try:
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        loc = f"{source}:{mark.line + 1}:{mark.column + 1}" if mark else source
        raise ConfigError(f"{loc}: {exc.problem or exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    if data is None:
        data = {}
    _check_keys(data, {"seed", "suites"}, "config")
    seed = data.get("seed")
    if seed is not None and not isinstance(seed, int):
        raise ConfigError("config.seed: must be an integer")
    raw = data.get("suites")
    if not isinstance(raw, list) or not raw:
        raise ConfigError("config.suites: must be a nonempty list")
    suites = []
    for i, entry in enumerate(raw):
        where = f"suites[{i}]"
        _check_keys(entry, {"name", "spec", "params", "tol"}, where)
        name = entry.get("name")
        if name not in SUITE_NAMES:
            raise ConfigError(f"{where}.name: unknown suite {name!r}")
        if "spec" not in entry:
            raise ConfigError(f"{where}.spec: required")
        _validate_spec(entry["spec"], f"{where}.spec")
        params = entry.get("params") or {}
        _check_keys(params, SUITE_PARAMS[name], f"{where}.params")
        tol = entry.get("tol", 1e-8)
        if isinstance(tol, str):
            try:
                tol = float(tol)
            except ValueError:
                raise ConfigError(f"{where}.tol: not a number: {tol!r}") from None
        if not isinstance(tol, (int, float)) or tol < 0:
            raise ConfigError(f"{where}.tol: must be a non-negative number")
        suites.append(SuiteEntry(name, entry["spec"], params, float(tol)))
    return SuiteConfig(suites, seed, base_dir)


def load_config(path):
    path = os.fspath(path)
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_config(text, source=path, base_dir=os.path.dirname(os.path.abspath(path)))
