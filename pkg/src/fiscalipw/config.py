"""Run configuration stored as an INI file.

Sections and keys (all optional; defaults shown by ``RunConfig().to_ini()``)::

    [data]      path, date_col, y_col, g_col, z_cols, x_recipe, log_unemployment
    [estimate]  baseline, e_min, parameterization, variants, robust
    [output]    format, path
    [mc]        n, J, mu, theta, noise_sd, prop_coeffs, outcome_coeffs, R, seed, n_jobs

List values are comma separated; ``prop_coeffs`` rows are separated by ``;``.
An empty ``[data] path`` means the bundled fixture dataset.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path

from .data import PanelConfig
from .effects import PARAMETERIZATIONS, VARIANTS
from .errors import ConfigError
from .mc import DEFAULT_PROP_COEFFS, DgpSpec

ENV_CONFIG = "FISCALIPW_CONFIG"
FIXTURE_NAME = "us_quarterly_1992q1_2019q4.csv"
FORMATS = ("text", "csv", "json")
BASELINE_MODES = ("full_sample", "expanding")

_SECTIONS = {
    "data": ("data_path", "date_col", "y_col", "g_col", "z_cols", "x_recipe", "log_unemployment"),
    "estimate": ("baseline", "e_min", "parameterization", "variants", "robust"),
    "output": ("format", "out"),
    "mc": ("mc_n", "mc_J", "mc_mu", "mc_theta", "mc_noise_sd", "mc_prop_coeffs",
           "mc_outcome_coeffs", "mc_R", "seed", "n_jobs"),
}
_KEYS = {"data_path": "path", "out": "path"}


def fixture_path() -> Path:
    return Path(str(resources.files("fiscalipw") / "data" / FIXTURE_NAME))


@dataclass
class RunConfig:
    data_path: str = ""
    date_col: str = "date"
    y_col: str = "rgdp"
    g_col: str = "gov_spend"
    z_cols: tuple[str, ...] = ("log(rgdp)", "ted", "log(commodity)", "log(unemp)")
    x_recipe: tuple[str, ...] = ("diff(log(rgdp))", "diff(log(commodity))", "diff(log(unemp))")
    log_unemployment: bool = True
    baseline: str = "full_sample"
    e_min: float = 0.01
    parameterization: str = "reference_coded"
    variants: tuple[str, ...] = VARIANTS
    robust: bool = False
    format: str = "text"
    out: str = ""
    mc_n: int = 2000
    mc_J: int = 4
    mc_mu: tuple[float, ...] = (-1.0, 0.0, 1.0, 2.0)
    mc_theta: float = 0.5
    mc_noise_sd: float = 1.0
    mc_prop_coeffs: tuple[tuple[float, ...], ...] = DEFAULT_PROP_COEFFS
    mc_outcome_coeffs: tuple[float, ...] = (0.5, 0.25, -0.25)
    mc_R: int = 200
    seed: int = 42
    n_jobs: int = 1
    _extra: dict = field(default_factory=dict, repr=False, compare=False)

    def validate(self) -> "RunConfig":
        if self.baseline not in BASELINE_MODES:
            raise ConfigError(f"baseline must be one of {BASELINE_MODES}, got {self.baseline!r}")
        if self.parameterization not in PARAMETERIZATIONS:
            raise ConfigError(f"parameterization must be one of {PARAMETERIZATIONS}")
        bad = [v for v in self.variants if v not in VARIANTS]
        if bad or not self.variants:
            raise ConfigError(f"unknown variant(s) {bad}; choose from {VARIANTS}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got {self.format!r}")
        if self.n_jobs < 1:
            raise ConfigError("n_jobs must be at least 1")
        return self

    def resolved_data_path(self) -> Path:
        return Path(self.data_path) if self.data_path else fixture_path()

    def panel_config(self) -> PanelConfig:
        return PanelConfig(y_col=self.y_col, g_col=self.g_col, log_unemployment=self.log_unemployment,
                           x_recipe=tuple(self.x_recipe), z_recipe=tuple(self.z_cols))

    def required_columns(self) -> list[str]:
        return self.panel_config().columns()

    def dgp_spec(self) -> DgpSpec:
        return DgpSpec(n=self.mc_n, J=self.mc_J, mu=tuple(self.mc_mu), prop_coeffs=self.mc_prop_coeffs,
                       noise_sd=self.mc_noise_sd, theta=self.mc_theta, seed=self.seed,
                       outcome_coeffs=tuple(self.mc_outcome_coeffs), e_min=self.e_min)

    # -- serialisation -----------------------------------------------------

    def to_ini(self) -> str:
        parser = configparser.ConfigParser(interpolation=None)
        for section, names in _SECTIONS.items():
            parser[section] = {_KEYS.get(name, name.removeprefix("mc_")): _dump(getattr(self, name))
                               for name in names}
        buf = io.StringIO()
        parser.write(buf)
        return buf.getvalue()

    @classmethod
    def from_ini(cls, text: str) -> "RunConfig":
        parser = configparser.ConfigParser(interpolation=None)
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"malformed config: {exc}".splitlines()[0]) from None
        types = {f.name: f.type for f in fields(cls)}
        values = {}
        for section in parser.sections():
            if section not in _SECTIONS:
                raise ConfigError(f"unknown config section [{section}]")
            lookup = {_KEYS.get(n, n.removeprefix("mc_")).lower(): n for n in _SECTIONS[section]}
            for key, raw in parser[section].items():
                if key not in lookup:
                    raise ConfigError(f"unknown key {key!r} in [{section}]")
                name = lookup[key]
                values[name] = _load(raw, types[name], f"[{section}] {key}")
        return cls(**values).validate()

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        return cls.from_ini(path.read_text(encoding="utf-8"))


def _dump(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        if value and isinstance(value[0], tuple):
            return "; ".join(", ".join(repr(float(v)) for v in row) for row in value)
        return ", ".join(repr(float(v)) if isinstance(v, float) else str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _load(raw: str, type_name: str, where: str):
    raw = raw.strip()
    try:
        if type_name == "bool":
            low = raw.lower()
            if low not in ("true", "false", "yes", "no", "1", "0", "on", "off"):
                raise ValueError(raw)
            return low in ("true", "yes", "1", "on")
        if type_name == "int":
            return int(raw)
        if type_name == "float":
            return float(raw)
        if type_name == "tuple[str, ...]":
            return tuple(p.strip() for p in _split_top(raw) if p.strip())
        if type_name == "tuple[float, ...]":
            return tuple(float(p) for p in raw.split(",") if p.strip())
        if type_name == "tuple[tuple[float, ...], ...]":
            return tuple(tuple(float(p) for p in row.split(",")) for row in raw.split(";") if row.strip())
        return raw
    except ValueError:
        raise ConfigError(f"invalid value {raw!r} for {where}") from None


def _split_top(text: str) -> list[str]:
    # Commas inside parentheses belong to the expression, not the list.
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
            continue
        depth += ch == "("
        depth -= ch == ")"
        cur.append(ch)
    parts.append("".join(cur))
    return parts
