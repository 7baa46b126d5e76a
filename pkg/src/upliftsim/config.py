"""JSON loading for environment configs and run manifests.

Environment config (``schema: "upliftsim.env/1"``)::

    {
      "schema": "upliftsim.env/1",
      "arms": 2, "N": 2, "M": 2,
      "active_mask": [0, 1],
      "entity": {"kind": "uniform", "low": -1, "high": 1},
      "confounder": {"kind": "gaussian", "loc": 0, "scale": 1, "per_entity": false},
      "base": {"kind": "sine", "lambda": [2, 1], "g": [0.7, 0.7]},
      "drift": {"kind": "constant", "level": 0},
      "noise": {"enabled": true, "beta": 10, "sigmoid_scale": 3},
      "seed": 0, "horizon": null
    }

``base`` is shared by every arm; ``bases`` (a list, one per arm) allows
heterogeneous arms instead. Base kinds: ``sine`` (``lambda``, ``g``,
optional ``g_arms``), ``polynomial`` (``q``, ``k_i``, ``h_range``,
``selector_seed``), ``tabulated`` (``path`` to a lattice CSV, inline
``axes`` + ``values``, or ``constant``) and ``mixture`` (``components``: a
list of ``{"weight": w, "base": {...}}``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from numbers import Real
from pathlib import Path

import numpy as np

from .agents import AgentSpec
from .bases import MixtureBase, PolyBase, SineBase, TabulatedBase, read_grid_csv
from .context import DimensionPolicy, Distribution
from .drift import DriftSpec
from .environment import EnvironmentConfig
from .errors import ConfigError
from .noise import NoiseSpec

ENV_SCHEMA = "upliftsim.env/1"
MANIFEST_SCHEMA = "upliftsim.manifest/1"


def _check_keys(obj, where: str, allowed: set[str]) -> None:
    if not isinstance(obj, dict):
        raise ConfigError(where, "must be a JSON object")
    extra = sorted(set(obj) - allowed)
    if extra:
        raise ConfigError(f"{where}.{extra[0]}", "unknown key")


def _field(where: str, key: str) -> str:
    return f"{where}.{key}" if where else key


def _num(obj, key, where, default=None, required=False):
    if key not in obj or obj[key] is None:
        if required:
            raise ConfigError(_field(where, key), "required")
        return default
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, Real):
        raise ConfigError(_field(where, key), f"must be a number, got {value!r}")
    return float(value)


def _int(obj, key, where, default=None, required=False):
    value = _num(obj, key, where, default, required)
    if value is None:
        return None
    if int(value) != value:
        raise ConfigError(_field(where, key), f"must be an integer, got {obj[key]!r}")
    return int(value)


def _vector(obj, key, where, required=True):
    if key not in obj:
        if required:
            raise ConfigError(_field(where, key), "required")
        return None
    value = obj[key]
    if not isinstance(value, list) or any(isinstance(v, bool) or not isinstance(v, Real) for v in value):
        raise ConfigError(_field(where, key), "must be a list of numbers")
    return tuple(float(v) for v in value)


def _distribution(obj, where, default: Distribution) -> tuple[Distribution, dict]:
    if obj is None:
        return default, {}
    _check_keys(obj, where, {"kind", "low", "high", "loc", "scale", "per_entity"})
    dist = Distribution(
        kind=obj.get("kind", default.kind),
        low=_num(obj, "low", where, default.low),
        high=_num(obj, "high", where, default.high),
        loc=_num(obj, "loc", where, default.loc),
        scale=_num(obj, "scale", where, default.scale),
    )
    dist.validate(where)
    return dist, obj


def parse_base(obj, where: str, m: int, policy: DimensionPolicy, base_dir: Path):
    if not isinstance(obj, dict):
        raise ConfigError(where, "must be a JSON object")
    kind = obj.get("kind")
    if kind == "sine":
        _check_keys(obj, where, {"kind", "lambda", "g", "g_arms"})
        lambdas = _vector(obj, "lambda", where)
        g = _vector(obj, "g", where)
        if len(g) != m:
            raise ConfigError(f"{where}.g", f"must have length M={m}, got {len(g)}")
        g_arms = None
        if "g_arms" in obj:
            if not isinstance(obj["g_arms"], list):
                raise ConfigError(f"{where}.g_arms", "must be a list of vectors")
            g_arms = tuple(_vector({"v": v}, "v", f"{where}.g_arms") for v in obj["g_arms"])
        base = SineBase(lambdas=tuple(int(v) if v == int(v) else v for v in lambdas), g=g, displacements=g_arms)
    elif kind == "polynomial":
        _check_keys(obj, where, {"kind", "q", "k_i", "h_range", "selector_seed"})
        q = _num(obj, "q", where, required=True)
        if q != int(q) or q < 1:
            raise ConfigError(f"{where}.q", f"must be a positive integer, got {obj['q']!r}")
        k = obj.get("k_i")
        if not isinstance(k, list) or not k:
            raise ConfigError(f"{where}.k_i", "required: one coefficient vector per arm")
        coeffs = tuple(_vector({"k": row}, "k", f"{where}.k_i") for row in k)
        h_range = _vector(obj, "h_range", where, required=False) or (-0.5, 0.5)
        if len(h_range) != 2:
            raise ConfigError(f"{where}.h_range", "must be [a, b]")
        base = PolyBase(
            q=int(q), coefficients=coeffs, m=m, h_range=tuple(h_range),
            selector_seed=_int(obj, "selector_seed", where, 0),
        )
    elif kind == "tabulated":
        _check_keys(obj, where, {"kind", "path", "axes", "values", "constant"})
        if "path" in obj:
            path = Path(obj["path"])
            if not path.is_absolute():
                path = base_dir / path
            try:
                base = read_grid_csv(path)
            except ConfigError as exc:
                raise ConfigError(f"{where}.path", str(exc)) from exc
        elif "constant" in obj:
            value = _num(obj, "constant", where, required=True)
            low, high = policy.domain_box()
            axes = tuple(np.array([lo, hi]) for lo, hi in zip(low, high))
            base = TabulatedBase(axes=axes, values=np.full((2,) * m, value))
        else:
            if "axes" not in obj or "values" not in obj:
                raise ConfigError(where, "tabulated base needs path, constant, or axes + values")
            axes = tuple(np.asarray(_vector({"a": a}, "a", f"{where}.axes")) for a in obj["axes"])
            try:
                values = np.asarray(obj["values"], dtype=float)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{where}.values", "must be a nested numeric array") from exc
            base = TabulatedBase(axes=axes, values=values)
    elif kind == "mixture":
        _check_keys(obj, where, {"kind", "components"})
        comps = obj.get("components")
        if not isinstance(comps, list) or not comps:
            raise ConfigError(f"{where}.components", "required: non-empty list")
        parsed = []
        for j, comp in enumerate(comps):
            cw = f"{where}.components[{j}]"
            _check_keys(comp, cw, {"weight", "base"})
            parsed.append((_num(comp, "weight", cw, required=True), parse_base(comp.get("base"), f"{cw}.base", m, policy, base_dir)))
        base = MixtureBase(components=tuple(parsed))
    else:
        raise ConfigError(f"{where}.kind", f"unknown base kind {kind!r}")
    base.validate(where)
    return base


def parse_drift(obj) -> DriftSpec:
    if obj is None:
        return DriftSpec()
    where = "drift"
    _check_keys(obj, where, {"kind", "level", "slope", "intercept", "amplitude", "omega", "phase",
                             "change_points", "step_scale", "seed"})
    points = obj.get("change_points", [])
    if not isinstance(points, list) or any(not isinstance(p, list) or len(p) != 2 for p in points):
        raise ConfigError("drift.change_points", "must be a list of [t, level] pairs")
    spec = DriftSpec(
        kind=obj.get("kind", "constant"),
        level=_num(obj, "level", where, 0.0),
        slope=_num(obj, "slope", where, 0.0),
        intercept=_num(obj, "intercept", where, 0.0),
        amplitude=_num(obj, "amplitude", where, 1.0),
        omega=_num(obj, "omega", where, 1.0),
        phase=_num(obj, "phase", where, 0.0),
        change_points=tuple((int(t), float(v)) for t, v in points),
        step_scale=_num(obj, "step_scale", where, 0.1),
        seed=_int(obj, "seed", where, 0),
    )
    spec.validate()
    return spec


def parse_noise(obj) -> NoiseSpec:
    if obj is None:
        return NoiseSpec(enabled=False)
    where = "noise"
    _check_keys(obj, where, {"enabled", "precision", "beta", "sigmoid_scale"})
    if "precision" in obj and "beta" in obj:
        raise ConfigError("noise.precision", "give either precision or beta, not both")
    key = "beta" if "beta" in obj else "precision"
    try:
        precision = _num(obj, key, where, 1.0)
    except ConfigError as exc:
        raise ConfigError("noise.precision", str(exc)) from exc
    enabled = obj.get("enabled", True)
    if not isinstance(enabled, bool):
        raise ConfigError("noise.enabled", "must be true or false")
    spec = NoiseSpec(precision=precision, sigmoid_scale=_num(obj, "sigmoid_scale", where, 3.0), enabled=enabled)
    spec.validate()
    return spec


ENV_KEYS = {"schema", "arms", "N", "M", "active_mask", "entity", "confounder", "base", "bases",
            "drift", "noise", "seed", "horizon", "description"}


def parse_config(obj: dict, base_dir: Path | str = ".") -> EnvironmentConfig:
    base_dir = Path(base_dir)
    _check_keys(obj, "config", ENV_KEYS)
    if obj.get("schema") != ENV_SCHEMA:
        raise ConfigError("schema", f"expected {ENV_SCHEMA!r}, got {obj.get('schema')!r}")
    n_arms = _int(obj, "arms", "", 2)
    n = _int(obj, "N", "", required=True)
    m = _int(obj, "M", "", required=True)
    mask = obj.get("active_mask")
    if mask is not None and (not isinstance(mask, list) or any(not isinstance(i, int) or isinstance(i, bool) for i in mask)):
        raise ConfigError("active_mask", "must be a list of integers")
    entity, _ = _distribution(obj.get("entity"), "entity", Distribution())
    confounder, conf_obj = _distribution(obj.get("confounder"), "confounder", Distribution(kind="gaussian"))
    per_entity = conf_obj.get("per_entity", False)
    if not isinstance(per_entity, bool):
        raise ConfigError("confounder.per_entity", "must be true or false")
    policy = DimensionPolicy(
        n_observed=n, m_domain=m, active_mask=tuple(mask or ()),
        entity_distribution=entity, confounder_distribution=confounder,
        confounders_per_entity=per_entity,
    )
    policy.validate()
    if ("base" in obj) == ("bases" in obj):
        raise ConfigError("base", "give exactly one of base (shared) or bases (per arm)")
    if "base" in obj:
        shared = parse_base(obj["base"], "base", m, policy, base_dir)
        bases = (shared,) * n_arms
    else:
        if not isinstance(obj["bases"], list):
            raise ConfigError("bases", "must be a list with one base per arm")
        bases = tuple(parse_base(b, f"bases[{i}]", m, policy, base_dir) for i, b in enumerate(obj["bases"]))
    horizon = _int(obj, "horizon", "", None)
    config = EnvironmentConfig(
        n_arms=n_arms, policy=policy, bases=bases,
        drift=parse_drift(obj.get("drift")), noise=parse_noise(obj.get("noise")),
        seed=_int(obj, "seed", "", 0), horizon=horizon, shared_base="base" in obj,
    )
    config.validate()
    return config


def read_json(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("file", f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("file", f"{path} is not valid JSON: {exc}") from exc


def load_config(path) -> EnvironmentConfig:
    path = Path(path)
    return parse_config(read_json(path), path.parent)


def parse_agent(obj, where: str = "agent") -> AgentSpec:
    _check_keys(obj, where, {"kind", "arm", "epsilon", "bins", "prior", "seed", "name"})
    prior = _vector(obj, "prior", where, required=False) or (1.0, 1.0)
    spec = AgentSpec(
        kind=obj.get("kind"),
        arm=_int(obj, "arm", where, 0),
        epsilon=_num(obj, "epsilon", where, 0.1),
        bins=_int(obj, "bins", where, 4),
        prior=tuple(prior),
        seed=_int(obj, "seed", where, 0),
        name=obj.get("name"),
    )
    spec.validate(where)
    return spec


@dataclass(frozen=True)
class RunManifest:
    config_path: Path
    agents: tuple[AgentSpec, ...]
    rounds: int
    seeds: tuple[int, ...]
    output: Path
    oracle_export: bool = True
    window: int = 100


def load_manifest(path) -> RunManifest:
    path = Path(path)
    obj = read_json(path)
    _check_keys(obj, "manifest", {"schema", "config", "agents", "rounds", "seeds", "output", "oracle_export", "window"})
    if obj.get("schema") != MANIFEST_SCHEMA:
        raise ConfigError("schema", f"expected {MANIFEST_SCHEMA!r}, got {obj.get('schema')!r}")
    if not isinstance(obj.get("config"), str):
        raise ConfigError("config", "required: path to the environment config")
    agents = obj.get("agents")
    if not isinstance(agents, list) or not agents:
        raise ConfigError("agents", "required: non-empty list of agent specs")
    specs = tuple(parse_agent(a, f"agents[{i}]") for i, a in enumerate(agents))
    labels = [s.label for s in specs]
    if len(set(labels)) != len(labels):
        raise ConfigError("agents", "agent labels must be unique; set name to disambiguate")
    seeds = obj.get("seeds")
    if not isinstance(seeds, list) or not seeds or any(not isinstance(s, int) or isinstance(s, bool) for s in seeds):
        raise ConfigError("seeds", "required: non-empty list of integers")
    rounds = _int(obj, "rounds", "", required=True)
    if rounds < 1:
        raise ConfigError("rounds", "must be >= 1")
    window = _int(obj, "window", "", 100)
    if window < 1:
        raise ConfigError("window", "must be >= 1")
    config_path = Path(obj["config"])
    if not config_path.is_absolute():
        config_path = path.parent / config_path
    output = Path(obj.get("output", "runs"))
    if not output.is_absolute():
        output = path.parent / output
    oracle_export = obj.get("oracle_export", True)
    if not isinstance(oracle_export, bool):
        raise ConfigError("oracle_export", "must be true or false")
    return RunManifest(
        config_path=config_path, agents=specs, rounds=rounds, seeds=tuple(seeds),
        output=output, oracle_export=oracle_export, window=window,
    )
