"""Model configuration files.

A config is a YAML mapping::

    lambda: 1.3          # optional, defaults to E Z
    epsilon: 1.0e-12     # optional truncation budget
    components:
      - weight: 1
        dist: bernoulli
        params: {p: 0.05}
        repeat: 10       # optional, default 1

``params`` is either a mapping with the family's parameter name
(bernoulli/geometric ``p``, poisson ``lam``, point ``k``, custom ``probs``),
a bare number, or a list of probabilities for ``custom``.

Built-in names ``set1``, ``set2`` and ``set{1,2}_n{10,20,30}`` stand for the
Bernoulli comparison-table parameter sets, truncated to their first n
components.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import yaml

from .errors import ConfigError, DomainError
from .experiments import TABLE1_SETS
from .pmf import Bernoulli, Component, DistSpec, WeightedSumModel

_PARAM_NAMES = {
    "bernoulli": ("p",),
    "geometric": ("p",),
    "poisson": ("lam", "lambda"),
    "point": ("k",),
    "custom": ("probs",),
}
_DIST_ALIASES = {"ber": "bernoulli", "geo": "geometric", "poi": "poisson", "pointmass": "point", "point_mass": "point"}
_TOP_KEYS = {"lambda", "epsilon", "components"}
_COMPONENT_KEYS = {"weight", "dist", "params", "repeat"}
_BUILTIN = re.compile(r"^set([12])(?:_n(10|20|30))?$")


@dataclass(frozen=True)
class ModelConfig:
    model: WeightedSumModel
    lam: float | None = None
    epsilon: float | None = None
    source: str = "<string>"


def builtin_config(name: str) -> ModelConfig | None:
    m = _BUILTIN.match(name)
    if m is None:
        return None
    set_id, n = int(m.group(1)), int(m.group(2) or 30)
    rows = TABLE1_SETS[set_id][:n]
    model = WeightedSumModel(tuple(Component(c, Bernoulli(p)) for p, c in rows))
    return ModelConfig(model, None, None, name)


def load_config(ref: str) -> ModelConfig:
    """Resolve a built-in name or read a YAML file.

    A bare name such as ``poisson_model`` is also looked up as
    ``poisson_model.yaml`` and under ``./configs``.
    """
    cfg = builtin_config(ref)
    if cfg is not None:
        return cfg
    path = _find(Path(ref))
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{ref}: cannot read config ({exc.strerror})") from None
    return parse_config(text, str(path))


def _find(path: Path) -> Path:
    """Try the path as given, then with a YAML suffix, also under ./configs."""
    bases = [path] if path.is_absolute() else [path, Path("configs") / path]
    for base in bases:
        cands = [base] if base.suffix else [base, base.with_suffix(".yaml"), base.with_suffix(".yml")]
        for cand in cands:
            if cand.is_file():
                return cand
    return path


def parse_config(text: str, source: str = "<string>") -> ModelConfig:
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = f":{mark.line + 1}" if mark is not None else ""
        raise ConfigError(f"{source}{line}: invalid YAML ({getattr(exc, 'problem', exc)})") from None

    if not isinstance(data, dict):
        raise ConfigError(f"{source}:1: top level must be a mapping with a 'components' list")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        key = sorted(map(str, unknown))[0]
        raise ConfigError(f"{source}:{_key_line(root, key)}: unknown key '{key}'")
    if "components" not in data:
        raise ConfigError(f"{source}:1: missing 'components'")
    entries = data["components"]
    if not isinstance(entries, list) or not entries:
        raise ConfigError(f"{source}:{_key_line(root, 'components')}: 'components' must be a non-empty list")

    entry_nodes = _value_node(root, "components").value
    comps = []
    for i, (entry, node) in enumerate(zip(entries, entry_nodes)):
        where = f"{source}:{node.start_mark.line + 1}: components[{i}]"
        comps.extend(_parse_component(entry, where))

    lam = _optional_float(data, "lambda", source, root)
    eps = _optional_float(data, "epsilon", source, root)
    if lam is not None and lam <= 0:
        raise ConfigError(f"{source}:{_key_line(root, 'lambda')}: lambda must be positive")
    if eps is not None and not 0 < eps <= 1e-6:
        raise ConfigError(f"{source}:{_key_line(root, 'epsilon')}: epsilon must lie in (0, 1e-6]")
    return ModelConfig(WeightedSumModel(tuple(comps)), lam, eps, source)


def _parse_component(entry, where: str) -> list[Component]:
    if not isinstance(entry, dict):
        raise ConfigError(f"{where}: each component must be a mapping")
    unknown = set(entry) - _COMPONENT_KEYS
    if unknown:
        raise ConfigError(f"{where}.{sorted(map(str, unknown))[0]}: unknown key")
    for key in ("weight", "dist", "params"):
        if key not in entry:
            raise ConfigError(f"{where}.{key}: missing")
    weight = entry["weight"]
    if isinstance(weight, bool) or not isinstance(weight, int) or weight < 1:
        raise ConfigError(f"{where}.weight: must be a positive integer, got {weight!r}")
    repeat = entry.get("repeat", 1)
    if isinstance(repeat, bool) or not isinstance(repeat, int) or repeat < 1:
        raise ConfigError(f"{where}.repeat: must be a positive integer, got {repeat!r}")

    kind = str(entry["dist"]).strip().lower()
    kind = _DIST_ALIASES.get(kind, kind)
    if kind not in _PARAM_NAMES:
        raise ConfigError(f"{where}.dist: unknown distribution {entry['dist']!r}")
    params = entry["params"]
    if isinstance(params, dict):
        names = [n for n in _PARAM_NAMES[kind] if n in params]
        extra = set(params) - set(_PARAM_NAMES[kind])
        if extra or len(names) != 1:
            raise ConfigError(f"{where}.params: {kind} expects exactly one of {_PARAM_NAMES[kind]}")
        params = params[names[0]]
    if kind == "custom":
        if not isinstance(params, list):
            raise ConfigError(f"{where}.params: custom expects a list of probabilities")
        values = tuple(params)
    else:
        values = (params,)
    values = tuple(_coerce(v) for v in values)
    if any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in values):
        raise ConfigError(f"{where}.params: parameters must be numbers")
    try:
        comp = Component(weight, DistSpec(kind, values))
    except DomainError as exc:
        raise ConfigError(f"{where}.params: {exc}") from None
    return [comp] * repeat


def _value_node(root, key):
    for k, v in root.value:
        if k.value == key:
            return v
    return None


def _key_line(root, key) -> int:
    if isinstance(root, yaml.MappingNode):
        for k, _ in root.value:
            if str(k.value) == key:
                return k.start_mark.line + 1
    return 1


def _optional_float(data, key, source, root) -> float | None:
    if key not in data or data[key] is None:
        return None
    val = _coerce(data[key])
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{source}:{_key_line(root, key)}: {key} must be a number")
    return float(val)


def _coerce(val):
    # YAML 1.1 reads exponent literals without a dot (1e-12) as strings
    if isinstance(val, str):
        try:
            return float(val)
        except ValueError:
            return val
    return val
