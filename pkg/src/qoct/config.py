"""Run configuration: a TOML file with a fixed set of sections and keys.

Example::

    units = "si"

    [source]
    center_wavelength = 1.3e-6   # m; or omega0 = ... (rad/s)
    bandwidth = 60e-9            # m, FWHM; or sigma = ... (rad/s)

    [grid]
    bins = 4096                  # 1 selects the monochromatic single-bin limit
    span = 6.0                   # half-width in sigmas

    [tau]                        # optional; defaults depend on the subcommand
    min = -1e-13
    max = 1e-13
    points = 1001

    [sample]
    reference_power = 1.0
    reflectors = [{depth = 0.0, reflectivity = 1.0}]

    [noise]
    mass = 1.0
    duration = 1.0
    mean_photons = 10.0
    samples = 1000000
    seed = 1234

    [output]
    path = "out.csv"

A JSON sidecar written by the CLI is also accepted; its ``config`` object is
the fully resolved configuration.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path

import tomli

from qoct.errors import FormatError
from qoct.spectra import SpectralProfile, profile_from_wavelength
from qoct.units import Units, units_by_name


class ConfigError(FormatError):
    pass


@dataclass(frozen=True)
class SourceConfig:
    omega0: float
    sigma: float
    t0: float = 0.0


@dataclass(frozen=True)
class GridConfig:
    bins: int = 4096
    span: float = 6.0


@dataclass(frozen=True)
class TauConfig:
    min: float | None = None
    max: float | None = None
    points: int | None = None


@dataclass(frozen=True)
class SampleConfig:
    reference_power: float = 1.0
    reflectors: tuple[tuple[float, float], ...] = ()


@dataclass(frozen=True)
class NoiseConfig:
    mass: float | None = None
    duration: float | None = None
    mean_photons: float = 10.0
    samples: int = 1_000_000
    seed: int = 0
    photons: int = 1
    bounces: int = 1
    mu: float = math.pi / 2
    Z1: float = 0.0
    Z2: float = 0.0
    C1: float = 0.0
    C2: float | None = None


@dataclass(frozen=True)
class RunConfig:
    units: str = "si"
    source: SourceConfig | None = None
    grid: GridConfig = field(default_factory=GridConfig)
    tau: TauConfig = field(default_factory=TauConfig)
    sample: SampleConfig = field(default_factory=SampleConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    output: str | None = None

    @property
    def unit_system(self) -> Units:
        return units_by_name(self.units)

    def profile(self) -> SpectralProfile:
        if self.source is None:
            raise ConfigError("configuration has no [source] section")
        return SpectralProfile(self.source.omega0, self.source.sigma, self.source.t0)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["sample"]["reflectors"] = [
            {"depth": depth, "reflectivity": r} for depth, r in self.sample.reflectors
        ]
        return d


_SECTIONS = {
    "source": {"omega0", "sigma", "t0", "center_wavelength", "bandwidth"},
    "grid": {"bins", "span"},
    "tau": {"min", "max", "points"},
    "sample": {"reference_power", "reflectors"},
    "noise": {f for f in NoiseConfig.__dataclass_fields__},
    "output": {"path"},
}
_TOP = {"units", *_SECTIONS}


def _line_of(text: str, key: str, section: str | None = None) -> int | None:
    lines = text.splitlines()
    start = 0
    if section is not None:
        header = re.compile(rf"^\s*\[\s*{re.escape(section)}\s*\]")
        for i, line in enumerate(lines):
            if header.match(line):
                start = i
                break
    pattern = re.compile(rf'^\s*"?{re.escape(key)}"?\s*=|\b{re.escape(key)}\s*=')
    for i in range(start, len(lines)):
        if pattern.search(lines[i]):
            return i + 1
    return None


class _Reader:
    def __init__(self, text: str, source_name: str):
        self.text = text
        self.name = source_name

    def fail(self, message: str, key: str | None = None, section: str | None = None):
        line = _line_of(self.text, key, section) if key else None
        where = f"{self.name}:{line}" if line else self.name
        raise ConfigError(f"{where}: {message}")

    def number(self, table: dict, section: str, key: str, *, positive=False, nonneg=False, integer=False):
        value = table[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(f"[{section}] {key} must be a number", key, section)
        if integer and int(value) != value:
            self.fail(f"[{section}] {key} must be an integer", key, section)
        if not math.isfinite(value):
            self.fail(f"[{section}] {key} must be finite", key, section)
        if positive and not value > 0:
            self.fail(f"[{section}] {key} must be positive", key, section)
        if nonneg and value < 0:
            self.fail(f"[{section}] {key} must be non-negative", key, section)
        return int(value) if integer else float(value)


def _parse(data: dict, text: str, source_name: str) -> RunConfig:
    r = _Reader(text, source_name)
    for key in data:
        if key not in _TOP:
            r.fail(f"unknown key {key!r}", key)
    for section, allowed in _SECTIONS.items():
        table = data.get(section, {})
        if section == "output" and isinstance(table, str):
            continue
        if not isinstance(table, dict):
            r.fail(f"{section} must be a table", section)
        for key in table:
            if key not in allowed:
                r.fail(f"unknown key {key!r} in [{section}]", key, section)

    units = data.get("units", "si")
    if units not in ("si", "natural"):
        r.fail(f"units must be 'si' or 'natural', got {units!r}", "units")
    unit_system = units_by_name(units)

    source = None
    if "source" in data:
        s = data["source"]
        t0 = r.number(s, "source", "t0", nonneg=True) if "t0" in s else 0.0
        if "omega0" in s or "sigma" in s:
            if "center_wavelength" in s or "bandwidth" in s:
                r.fail("give either omega0/sigma or center_wavelength/bandwidth, not both", "omega0", "source")
            if "omega0" not in s or "sigma" not in s:
                r.fail("[source] needs both omega0 and sigma", "source")
            source = SourceConfig(
                r.number(s, "source", "omega0", positive=True),
                r.number(s, "source", "sigma", positive=True),
                t0,
            )
        elif "center_wavelength" in s and "bandwidth" in s:
            prof = profile_from_wavelength(
                r.number(s, "source", "center_wavelength", positive=True),
                r.number(s, "source", "bandwidth", positive=True),
                t0,
                unit_system,
            )
            source = SourceConfig(prof.omega0, prof.sigma, t0)
        else:
            r.fail("[source] needs omega0 and sigma, or center_wavelength and bandwidth", "source")

    g = data.get("grid", {})
    grid = GridConfig(
        r.number(g, "grid", "bins", positive=True, integer=True) if "bins" in g else 4096,
        r.number(g, "grid", "span", positive=True) if "span" in g else 6.0,
    )

    t = data.get("tau", {})
    tau = TauConfig(
        r.number(t, "tau", "min") if "min" in t else None,
        r.number(t, "tau", "max") if "max" in t else None,
        r.number(t, "tau", "points", positive=True, integer=True) if "points" in t else None,
    )
    if tau.min is not None and tau.max is not None and not tau.max > tau.min:
        r.fail("[tau] max must exceed min", "max", "tau")

    sm = data.get("sample", {})
    reflectors = []
    raw_reflectors = sm.get("reflectors", [])
    if not isinstance(raw_reflectors, list):
        r.fail("[sample] reflectors must be an array of tables", "reflectors", "sample")
    for item in raw_reflectors:
        if not isinstance(item, dict) or set(item) != {"depth", "reflectivity"}:
            r.fail("each reflector needs exactly 'depth' and 'reflectivity'", "reflectors", "sample")
        depth = r.number(item, "sample", "depth", nonneg=True)
        refl = r.number(item, "sample", "reflectivity", nonneg=True)
        if refl > 1:
            r.fail("reflectivity must lie in [0, 1]", "reflectivity", "sample")
        reflectors.append((depth, refl))
    sample = SampleConfig(
        r.number(sm, "sample", "reference_power", positive=True) if "reference_power" in sm else 1.0,
        tuple(reflectors),
    )

    n = data.get("noise", {})
    kw = {}
    for key in ("mass", "duration", "mean_photons"):
        if key in n:
            kw[key] = r.number(n, "noise", key, positive=True)
    for key in ("samples", "photons", "bounces"):
        if key in n:
            kw[key] = r.number(n, "noise", key, positive=True, integer=True)
    if "seed" in n:
        kw["seed"] = r.number(n, "noise", "seed", nonneg=True, integer=True)
    if "mu" in n:
        kw["mu"] = r.number(n, "noise", "mu")
    for key in ("Z1", "Z2"):
        if key in n:
            kw[key] = r.number(n, "noise", key, nonneg=True)
    for key in ("C1", "C2"):
        if key in n and n[key] is not None:
            kw[key] = r.number(n, "noise", key)
    noise = NoiseConfig(**kw)

    out = data.get("output", {})
    if isinstance(out, str):
        path = out
    else:
        path = out.get("path")
        if path is not None and not isinstance(path, str):
            r.fail("[output] path must be a string", "path", "output")

    return RunConfig(units, source, grid, tau, sample, noise, path)


def _from_resolved(d: dict, source_name: str) -> RunConfig:
    """Inverse of :meth:`RunConfig.to_dict` (nulls mean 'not set')."""
    data: dict = {"units": d.get("units", "si")}
    if d.get("source"):
        data["source"] = {k: v for k, v in d["source"].items() if v is not None}
    for section in ("grid", "tau", "sample", "noise"):
        if d.get(section):
            data[section] = {k: v for k, v in d[section].items() if v is not None}
    if d.get("output") is not None:
        data["output"] = {"path": d["output"]}
    return _parse(data, json.dumps(d, indent=1), source_name)


def parse_config(text: str, source_name: str = "<config>") -> RunConfig:
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{source_name}:{exc.lineno}: {exc.msg}") from None
        return _from_resolved(d.get("config", d), source_name)
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        where = f"{source_name}:{m.group(1)}" if m else source_name
        raise ConfigError(f"{where}: {exc}") from None
    return _parse(data, text, source_name)


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read configuration ({exc.strerror})") from None
    return parse_config(text, str(path))
