"""
Experiment configuration files.

A config file holds one or more sections named after an experiment kind,
each a list of ``key = value`` lines::

    [area_law]
    dim = 1
    sites_per_side = 101
    near_critical = true
    region_fractions = 0.1, 0.2, 0.3, 0.4, 0.5
    mode_counts = full, 2
    output = area_law_1d.csv

Lists are comma separated. Seeds are either a list or a half-open range
``start:stop``. Lattice size is given by ``sites_per_side`` or by the UV
integer ``uv_n`` (``sites_per_side = 2 uv_n + 1``). A ``[DEFAULT]`` section
supplies shared values, and ``[kind:label]`` allows several sections of the
same kind in one file.
"""

import configparser
import json
from dataclasses import dataclass, field

from ..errors import ConfigError
from ..lattice import LatticeSpec

REQUIRED = object()
KINDS = ("profile", "area_law", "convergence", "bound_mc", "continuum_profile", "counterexample", "verify")
FORMATS = ("csv", "json")


def _scalar(conv):
    def parse(value):
        if isinstance(value, str):
            value = value.strip()
        return conv(value)

    return parse


def _bool(value):
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


def _fraction(value):
    if isinstance(value, str) and "/" in value:
        num, den = value.split("/")
        return float(num) / float(den)
    return float(value)


def _list(conv):
    def parse(value):
        if isinstance(value, str):
            items = [v.strip() for v in value.split(",") if v.strip()]
        elif isinstance(value, (list, tuple)):
            items = list(value)
        else:
            items = [value]
        if not items:
            raise ValueError("empty list")
        return [conv(v) for v in items]

    return parse


def _seeds(value):
    if isinstance(value, str) and ":" in value:
        start, stop = (int(v) for v in value.split(":"))
        if stop <= start:
            raise ValueError("seed range is empty")
        return list(range(start, stop))
    return _list(int)(value)


def _mode_count(value):
    text = str(value).strip().lower()
    if text in ("full", "boundary"):
        return text
    n = int(text)
    if n < 1:
        raise ValueError("mode counts must be positive")
    return n


def _choice(options):
    def parse(value):
        text = str(value).strip()
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text

    return parse


_int, _float, _str = _scalar(int), _scalar(float), _scalar(str)

_LATTICE = {
    "dim": (_int, REQUIRED),
    "sites_per_side": (_int, None),
    "uv_n": (_int, None),
    "box_length": (_float, None),
    "mass": (_float, None),
    "near_critical": (_bool, False),
}
_OUTPUT = {
    "output": (_str, None),
    "format": (_choice(FORMATS), "csv"),
    "workers": (_int, None),
}
_CONTINUUM_LATTICE = {
    "dim": (_int, 1),
    "box_length": (_float, 1.0),
    "mass": (_float, None),
}

SCHEMAS = {
    "profile": {
        **_LATTICE,
        "region_fraction": (_fraction, 1 / 3),
        "region_side": (_int, None),
        "modes": (_int, 1),
        "include_partner": (_bool, False),
    },
    "area_law": {
        **_LATTICE,
        "region_fractions": (_list(_fraction), REQUIRED),
        "mode_counts": (_list(_mode_count), ["full", "boundary"]),
        "saturation_target": (_float, 0.99),
    },
    "convergence": {
        **_CONTINUUM_LATTICE,
        "uv_values": (_list(_int), REQUIRED),
        "region_fraction": (_fraction, 1 / 3),
    },
    "bound_mc": {
        **_LATTICE,
        "region_sites": (_list(_int), None),
        "region_fraction": (_fraction, None),
        "region_side": (_int, None),
        "k": (_list(_int), REQUIRED),
        "seeds": (_seeds, REQUIRED),
        "intensity": (_float, 1.0),
        "basis": (_choice(("sites", "normal")), "sites"),
    },
    "continuum_profile": {
        **_CONTINUUM_LATTICE,
        "uv_values": (_list(_int), REQUIRED),
        "region_fraction": (_fraction, 1 / 3),
        "rank": (_int, 0),
        "partner": (_bool, False),
        "lambda_q": (_float, 1.0),
        "lambda_p": (_float, 1.0),
        "points_per_site": (_int, 4),
        "truncate": (_bool, False),
    },
    "counterexample": {
        "nu_strong": (_float, 3.0),
        "nu_weak": (_float, 2.0),
        "swap_bc": (_bool, False),
    },
    "verify": {
        "quick": (_bool, False),
    },
}
for _schema in SCHEMAS.values():
    _schema.update(_OUTPUT)


@dataclass
class ExperimentConfig:
    """A validated experiment: its kind and fully resolved parameters."""

    kind: str
    params: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.params[key]

    def get(self, key, default=None):
        value = self.params.get(key)
        return default if value is None else value

    @property
    def output(self):
        return self.get("output", f"{self.kind}.{self.params['format']}")

    def to_dict(self):
        return {"kind": self.kind, **self.params}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    def lattice(self):
        """Lattice described by the lattice keys (only for kinds that have them)."""
        p = self.params
        return LatticeSpec.from_config(
            {
                "dim": p["dim"],
                "sites_per_side": p["sites_per_side"],
                "box_length": p.get("box_length"),
                "mass": p.get("mass"),
                "near_critical": p.get("near_critical", False),
            }
        )


def resolve(kind, raw, section=None):
    """Validate a raw mapping (strings or typed values) for ``kind``."""
    section = section or kind
    if kind not in SCHEMAS:
        raise ConfigError(f"unknown experiment kind {kind!r}; expected one of {', '.join(KINDS)}", section)
    schema = SCHEMAS[kind]
    raw = {k: v for k, v in raw.items() if k != "kind"}
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError("unknown key", f"{section}.{unknown[0]}")
    params = {}
    for key, (conv, default) in schema.items():
        path = f"{section}.{key}"
        if key in raw and raw[key] is not None and raw[key] != "":
            try:
                params[key] = conv(raw[key])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"invalid value {raw[key]!r}: {exc}", path) from None
        elif default is REQUIRED:
            raise ConfigError("missing required field", path)
        else:
            params[key] = list(default) if isinstance(default, list) else default
    _check(kind, params, section)
    return ExperimentConfig(kind, params)


def _check(kind, p, section):
    if "sites_per_side" in p:
        if p["sites_per_side"] is None and p["uv_n"] is None:
            raise ConfigError("give sites_per_side or uv_n", f"{section}.sites_per_side")
        if p["uv_n"] is not None:
            sites = 2 * p["uv_n"] + 1
            if p["sites_per_side"] not in (None, sites):
                raise ConfigError("disagrees with uv_n", f"{section}.sites_per_side")
            p["sites_per_side"] = sites
        p["uv_n"] = (p["sites_per_side"] - 1) // 2
        if p["near_critical"] == (p["mass"] is not None):
            raise ConfigError("give exactly one of mass or near_critical = true", f"{section}.mass")
    if p.get("workers") is not None and p["workers"] < 1:
        raise ConfigError("must be at least 1", f"{section}.workers")
    if kind == "bound_mc":
        given = [p[k] is not None for k in ("region_sites", "region_fraction", "region_side")]
        if sum(given) != 1:
            raise ConfigError("give exactly one of region_sites, region_fraction, region_side", f"{section}.region_sites")
    if kind == "profile" and p["modes"] < 1:
        raise ConfigError("must be at least 1", f"{section}.modes")
    if kind in ("convergence", "continuum_profile"):
        values = p["uv_values"]
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ConfigError("must be strictly increasing", f"{section}.uv_values")


def parse_text(text, source="<config>"):
    """All experiments in a config file body, in file order."""
    # DEFAULT is read as an ordinary section so that its keys only fill in
    # the kinds whose schema knows them
    parser = configparser.ConfigParser(interpolation=None, default_section="\0")
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(str(exc).replace("\n", " "), source) from None
    defaults = dict(parser["DEFAULT"]) if parser.has_section("DEFAULT") else {}
    names = [n for n in parser.sections() if n != "DEFAULT"]
    if not names:
        raise ConfigError("no experiment sections", source)
    configs = []
    for name in names:
        kind = name.split(":", 1)[0].strip()
        known = SCHEMAS.get(kind, {})
        raw = {k: v for k, v in defaults.items() if k in known}
        raw.update(parser[name])
        configs.append(resolve(kind, raw, section=name))
    return configs


def load(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", str(path)) from None
    return parse_text(text, source=str(path))


def from_dict(mapping):
    """Re-parse the dictionary written into output metadata."""
    mapping = dict(mapping)
    try:
        kind = mapping.pop("kind")
    except KeyError:
        raise ConfigError("missing required field", "kind") from None
    return resolve(kind, mapping)
