"""Run configuration: TOML files with dotted keys.

Grammar (every key optional, unknown keys are rejected)::

    symbol = "1 - abs(z1)^2"       # or a list of symbols
    truncation = 120               # N_outer on C^1, grade bound on C^n, degree on lenses
    order = 64                     # quadrature order floor
    cuts = [0, 30, 60, 90, 118]
    seed = 0
    out = "runs"
    cache_dir = ".bergmanlab-cache"

    domain.kind = "annulus"        # disc, punctured_disc, polydisc, bidisc, ball, annulus, shell, lens
    domain.n = 2
    domain.eps = 0.5
    domain.r_in = 1.0
    domain.r_out = 2.0
    domain.center = "0.75"         # lens only; complex constants as text
    domain.radius = 0.2            # domain.lens_center / domain.lens_radius are aliases
    domain.parent.kind = "annulus" # lens parent, same keys as domain
    domain.parent.eps = 0.5

    weight.r = 1
    weight.rho = "algebraic"       # or "distance"

    thresholds.decay = 0.05
    thresholds.persist = 0.5

    probe.point = "1"              # boundary point for rays and probes
    probe.radii = [0.5, 0.7, 0.9, 0.99]
    probe.dists = [0.1, 0.01, 0.001]
    probe.w = "0.3"
    probe.z = "0.5*i"

    localization.R1 = 0.2
    localization.R2 = 0.4
    localization.maxdeg = 20
    localization.step = 5

    inflation.pairs = 20
    inflation.samples = 10000000
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from ..domain import DomainSpec, WeightSpec, build_domain
from ..errors import BergmanLabError, ConfigError
from ..symbol import Const, as_symbol

_DOMAIN_KEYS = {"kind", "n", "eps", "r_in", "r_out", "center", "radius", "parent",
                "lens_center", "lens_radius"}
_ALIASES = {"lens_center": "center", "lens_radius": "radius"}
_SCHEMA = {
    "symbol": None, "truncation": None, "order": None, "cuts": None, "seed": None,
    "out": None, "cache_dir": None,
    "domain": _DOMAIN_KEYS,
    "weight": {"r", "rho"},
    "thresholds": {"decay", "persist"},
    "probe": {"point", "radii", "dists", "w", "z"},
    "localization": {"R1", "R2", "maxdeg", "step"},
    "inflation": {"pairs", "samples"},
}


@dataclass(frozen=True)
class RunConfig:
    """Resolved settings; ``None`` means the scenario's standard value."""

    domain: dict | None = None
    weight: dict | None = None
    symbol: tuple | None = None
    truncation: int | None = None
    order: int | None = None
    cuts: tuple | None = None
    out: Path = Path("runs")
    thresholds: tuple = (0.05, 0.5)
    seed: int = 0
    cache_dir: Path | None = None
    probe: dict = field(default_factory=dict)
    localization: dict = field(default_factory=dict)
    inflation: dict = field(default_factory=dict)

    def with_overrides(self, **kw) -> RunConfig:
        """Copy with the non-``None`` keyword values replaced."""
        return dataclasses.replace(self, **{k: v for k, v in kw.items() if v is not None})

    def build_domain(self, default: DomainSpec) -> DomainSpec:
        return default if self.domain is None else domain_from_table(self.domain)

    def build_weight(self, default: WeightSpec) -> WeightSpec:
        if self.weight is None:
            return default
        try:
            return WeightSpec(float(self.weight.get("r", default.r)),
                              str(self.weight.get("rho", default.rho)))
        except BergmanLabError as exc:
            raise ConfigError(f"weight: {exc}") from exc

    def to_table(self) -> dict:
        """The settings as a config document; ``config_from_dict`` inverts it."""
        d = {"seed": self.seed, "out": str(self.out),
             "thresholds": {"decay": self.thresholds[0], "persist": self.thresholds[1]}}
        for key in ("domain", "weight", "truncation", "order"):
            if getattr(self, key) is not None:
                d[key] = getattr(self, key)
        for key in ("symbol", "cuts"):
            if getattr(self, key) is not None:
                d[key] = list(getattr(self, key))
        if self.cache_dir is not None:
            d["cache_dir"] = str(self.cache_dir)
        for key in ("probe", "localization", "inflation"):
            if getattr(self, key):
                d[key] = dict(getattr(self, key))
        return d

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["out"] = str(self.out)
        d["cache_dir"] = None if self.cache_dir is None else str(self.cache_dir)
        d["thresholds"] = list(self.thresholds)
        for k in ("symbol", "cuts"):
            d[k] = None if d[k] is None else list(d[k])
        return d


def complex_value(v, what: str) -> complex:
    """A number, or text that folds to a constant (``"0.3 + 0.4*i"``)."""
    if isinstance(v, bool):
        raise ConfigError(f"{what}: expected a number")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, str):
        try:
            node = as_symbol(v)
        except BergmanLabError as exc:
            raise ConfigError(f"{what}: {exc}") from exc
        if isinstance(node, Const):
            return complex(node.value)
    raise ConfigError(f"{what}: {v!r} is not a constant")


def point_value(v, n: int, what: str) -> np.ndarray:
    vals = v if isinstance(v, list) else [v]
    if len(vals) != n:
        raise ConfigError(f"{what}: expected {n} coordinate(s), got {len(vals)}")
    return np.array([complex_value(x, what) for x in vals])


def domain_from_table(table: dict) -> DomainSpec:
    unknown = set(table) - _DOMAIN_KEYS
    if unknown:
        raise ConfigError(f"unknown domain keys: {sorted(unknown)}")
    if "kind" not in table:
        raise ConfigError("domain.kind is required")
    params = {_ALIASES.get(k, k): v for k, v in table.items() if k != "kind"}
    try:
        if table["kind"] == "lens":
            if "parent" not in params:
                raise ConfigError("a lens needs domain.parent.kind")
            params["parent"] = domain_from_table(params["parent"])
            params["center"] = complex_value(params.get("center", 0), "domain.center")
        return build_domain(table["kind"], **params)
    except ConfigError:
        raise
    except (BergmanLabError, TypeError, ValueError) as exc:
        raise ConfigError(f"domain: {exc}") from exc


def parse_domain_arg(text: str) -> dict:
    """``kind[:key=value,...]`` as a domain table.

    Lens parents use ``parent=<kind>`` with the parent's parameters prefixed by
    ``parent.``, for example ``lens:parent=annulus,parent.eps=0.5,center=0.75,radius=0.2``.
    """
    kind, _, rest = text.partition(":")
    table: dict = {"kind": kind.strip()}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, value = item.partition("=")
        if not eq:
            raise ConfigError(f"domain parameter {item!r} needs key=value")
        key = key.strip()
        value = value.strip()
        target = table
        if key == "parent":
            table.setdefault("parent", {})["kind"] = value
            continue
        if key.startswith("parent."):
            target = table.setdefault("parent", {})
            key = key[len("parent."):]
        if key in ("kind", "center"):
            target[key] = value
        elif key == "n":
            target[key] = int(value)
        else:
            try:
                target[key] = float(value)
            except ValueError as exc:
                raise ConfigError(f"domain parameter {key}: {value!r} is not a number") from exc
    return table


def _check_schema(data: dict):
    for key, value in data.items():
        if key not in _SCHEMA:
            raise ConfigError(f"unknown key {key!r}")
        sub = _SCHEMA[key]
        if sub is None:
            if isinstance(value, dict):
                raise ConfigError(f"{key!r} is a value, not a section")
            continue
        if not isinstance(value, dict):
            raise ConfigError(f"{key!r} is a section; use dotted keys such as {key}.<name>")
        unknown = set(value) - sub
        if unknown:
            raise ConfigError(f"unknown keys in {key}: {sorted(unknown)}")


def _positive_int(v, what: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise ConfigError(f"{what} must be a positive integer")
    return v


def config_from_dict(data: dict) -> RunConfig:
    """Validate a parsed TOML document."""
    _check_schema(data)
    kw: dict = {}
    if "domain" in data:
        domain_from_table(data["domain"])
        kw["domain"] = data["domain"]
    if "weight" in data:
        kw["weight"] = dict(data["weight"])
    if "symbol" in data:
        sym = data["symbol"]
        sym = [sym] if isinstance(sym, str) else sym
        if not isinstance(sym, list) or not all(isinstance(s, str) for s in sym) or not sym:
            raise ConfigError("symbol must be text or a list of texts")
        for s in sym:
            try:
                as_symbol(s)
            except BergmanLabError as exc:
                raise ConfigError(f"symbol {s!r}: {exc}") from exc
        kw["symbol"] = tuple(sym)
    for key in ("truncation", "order"):
        if key in data:
            kw[key] = _positive_int(data[key], key)
    if "cuts" in data:
        cuts = data["cuts"]
        if not isinstance(cuts, list) or not all(isinstance(c, int) and c >= 0 for c in cuts):
            raise ConfigError("cuts must be a list of non-negative integers")
        if any(b <= a for a, b in zip(cuts, cuts[1:])):
            raise ConfigError("cuts must be strictly increasing")
        kw["cuts"] = tuple(cuts)
    if "seed" in data:
        seed = data["seed"]
        if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        kw["seed"] = seed
    if "out" in data:
        kw["out"] = Path(str(data["out"]))
    if "cache_dir" in data:
        kw["cache_dir"] = Path(str(data["cache_dir"]))
    if "thresholds" in data:
        t = data["thresholds"]
        decay, persist = float(t.get("decay", 0.05)), float(t.get("persist", 0.5))
        if not 0 < decay <= persist or not math.isfinite(persist):
            raise ConfigError("thresholds need 0 < decay <= persist")
        kw["thresholds"] = (decay, persist)
    for key in ("probe", "localization", "inflation"):
        if key in data:
            kw[key] = dict(data[key])
    cfg = RunConfig(**kw)
    cfg.build_weight(WeightSpec())
    return cfg


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(data)
