"""Run specifications: YAML loading with field-path validation and figure presets."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, replace

import numpy as np
import yaml

from .channel import GeometryConfig, OpenLoop, Dynamic, RadioConfig, Scenario, User, tau_th_average

METHODS = ("exact", "closed", "asym", "mc")
PROTOCOLS = ("dynamic", "openloop")


class SpecError(ValueError):
    """Invalid run specification; the message starts with the field path."""

    def __init__(self, path: str, msg: str):
        super().__init__(f"{path}: {msg}")
        self.path = path


@dataclass(frozen=True)
class GridSpec:
    start: float = 90.0
    stop: float = 130.0
    step: float = 5.0

    def values(self) -> list[float]:
        if self.step <= 0:
            raise SpecError("grid.step", "must be > 0")
        if self.stop < self.start:
            raise SpecError("grid", "stop must be >= start")
        n = int(np.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return [round(self.start + i * self.step, 10) for i in range(n)]

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        parts = text.split(":")
        if len(parts) != 3:
            raise SpecError("grid", f"expected start:stop:step, got {text!r}")
        try:
            return cls(*(float(p) for p in parts))
        except ValueError:
            raise SpecError("grid", f"non-numeric value in {text!r}") from None


@dataclass(frozen=True)
class TauSpec:
    """Open-loop threshold, either linear or as a multiple of tau_th^ave."""

    value: float | None = None
    multiplier: float = 1.0
    exclusion_radius: float = 1.0

    def resolve(self, geo, radio, scenario) -> float:
        if self.value is not None:
            return float(self.value)
        return self.multiplier * tau_th_average(geo, radio, scenario, self.exclusion_radius)


@dataclass(frozen=True)
class McSpec:
    trials: int = 1_000_000
    seed: int = 0
    chunk_size: int = 1 << 16


@dataclass(frozen=True)
class RunSpec:
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    radio: RadioConfig = field(default_factory=RadioConfig)
    scenario: Scenario = Scenario.I
    protocols: tuple = PROTOCOLS
    users: tuple = ("GB", "GF")
    methods: tuple = ("exact", "mc")
    tau: TauSpec = field(default_factory=TauSpec)
    grid: GridSpec = field(default_factory=GridSpec)
    swept: User | None = None
    mc: McSpec = field(default_factory=McSpec)
    threads: int = 1

    @property
    def swept_user(self) -> User:
        return self.swept or self.scenario.swept_user

    def radio_at(self, rho_db: float) -> RadioConfig:
        return self.radio.with_rho_db(self.swept_user, rho_db)

    def protocol_at(self, name: str, radio: RadioConfig):
        if name == "dynamic":
            return Dynamic()
        return OpenLoop(self.tau.resolve(self.geometry, radio, self.scenario))

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["scenario"] = self.scenario.value
        d["swept"] = self.swept_user.value
        d["protocols"] = list(self.protocols)
        d["users"] = list(self.users)
        d["methods"] = list(self.methods)
        return d


# ---------------------------------------------------------------------------
# parsing


def _section(cls, data, path):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise SpecError(path, "expected a mapping")
    names = {f.name for f in dataclasses.fields(cls)}
    for k in data:
        if k not in names:
            raise SpecError(f"{path}.{k}", "unknown field")
    kwargs = {}
    for k, v in data.items():
        if isinstance(v, bool) or not isinstance(v, (int, float)) and v is not None:
            raise SpecError(f"{path}.{k}", f"expected a number, got {v!r}")
        kwargs[k] = v
    try:
        return cls(**kwargs)
    except (ValueError, TypeError) as e:
        msg = str(e)
        hit = [n for n in names if msg.startswith(n) or f"{n}=" in msg]
        raise SpecError(f"{path}.{hit[0]}" if hit else path, str(e)) from None


def _choices(data, path, allowed, default):
    if data is None:
        return tuple(default)
    items = [data] if isinstance(data, str) else data
    if not isinstance(items, list) or not items:
        raise SpecError(path, "expected a non-empty list")
    out = []
    for i, it in enumerate(items):
        if str(it) not in allowed:
            raise SpecError(f"{path}[{i}]", f"must be one of {', '.join(allowed)}")
        out.append(str(it))
    return tuple(out)


def spec_from_dict(data: dict | None) -> RunSpec:
    data = dict(data or {})
    known = {f.name for f in dataclasses.fields(RunSpec)}
    for k in data:
        if k not in known:
            raise SpecError(k, "unknown field")
    kw = {}
    kw["geometry"] = _section(GeometryConfig, data.get("geometry"), "geometry")
    kw["radio"] = _section(RadioConfig, data.get("radio"), "radio")
    kw["tau"] = _section(TauSpec, data.get("tau"), "tau")
    kw["grid"] = _section(GridSpec, data.get("grid"), "grid")
    mc = _section(McSpec, data.get("mc"), "mc")
    if mc.trials < 1000:
        raise SpecError("mc.trials", "must be >= 1000")
    if not 0 <= mc.seed < 2**64:
        raise SpecError("mc.seed", "must be a 64-bit unsigned integer")
    if mc.chunk_size < 1:
        raise SpecError("mc.chunk_size", "must be positive")
    kw["mc"] = McSpec(int(mc.trials), int(mc.seed), int(mc.chunk_size))
    if "scenario" in data:
        try:
            kw["scenario"] = Scenario(str(data["scenario"]))
        except ValueError:
            raise SpecError("scenario", "must be I or II") from None
    if data.get("swept") is not None:
        try:
            kw["swept"] = User(str(data["swept"]))
        except ValueError:
            raise SpecError("swept", "must be GB or GF") from None
    kw["protocols"] = _choices(data.get("protocols"), "protocols", PROTOCOLS, PROTOCOLS)
    kw["users"] = _choices(data.get("users"), "users", ("GB", "GF"), ("GB", "GF"))
    kw["methods"] = _choices(data.get("methods"), "methods", METHODS, ("exact", "mc"))
    if "threads" in data:
        t = data["threads"]
        if not isinstance(t, int) or t < 1:
            raise SpecError("threads", "must be a positive integer")
        kw["threads"] = t
    spec = RunSpec(**kw)
    spec.grid.values()
    return spec


def load_spec(path: str | None) -> RunSpec:
    if path is None:
        return RunSpec()
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as e:
        raise SpecError("config", str(e)) from None
    except yaml.YAMLError as e:
        raise SpecError("config", f"invalid YAML: {e}") from None
    if data is not None and not isinstance(data, dict):
        raise SpecError("config", "top level must be a mapping")
    return spec_from_dict(data)


# ---------------------------------------------------------------------------
# figure presets


@dataclass(frozen=True)
class FigurePreset:
    id: str
    description: str
    families: tuple  # (label, RunSpec)
    swept_label: str


def _fig_base(scenario: Scenario, **kw) -> RunSpec:
    return RunSpec(scenario=scenario, grid=GridSpec(90.0, 130.0, 5.0), **kw)


def figure_preset(fig_id: str, base: RunSpec | None = None) -> FigurePreset:
    """Parameter bundle of one figure; ``base`` supplies MC controls and threads."""
    b = base or RunSpec()
    common = dict(methods=b.methods, mc=b.mc, threads=b.threads)
    if fig_id == "fig1":
        fams = (("protocols", _fig_base(Scenario.I, **common)),)
        desc = "Scenario I, OP vs rho_GB for both protocols and users"
    elif fig_id == "fig2":
        fams = tuple(
            (f"alpha={a}", _fig_base(Scenario.I, geometry=GeometryConfig(alpha=a), **common)) for a in (2.2, 2.8, 3.5)
        )
        desc = "Scenario I, path-loss exponent family"
    elif fig_id == "fig3":
        fams = tuple(
            (f"tau={m}x", _fig_base(Scenario.I, protocols=("openloop",), tau=TauSpec(multiplier=m), **common))
            for m in (0.1, 1.0, 10.0)
        )
        desc = "Scenario I, open-loop threshold family"
    elif fig_id == "fig4":
        fams = (("protocols", _fig_base(Scenario.II, **common)),)
        desc = "Scenario II, OP vs rho_GF for both protocols and users"
    elif fig_id == "fig5":
        radii = ((150.0, 600.0), (200.0, 600.0), (250.0, 600.0), (200.0, 500.0), (200.0, 700.0))
        fams = tuple(
            (f"R1={r1:g},R2={r2:g}", _fig_base(Scenario.II, geometry=GeometryConfig(R1=r1, R2=r2), **common))
            for r1, r2 in radii
        )
        desc = "Scenario II, disc and ring radius family"
    elif fig_id == "fig6":
        rates = ((1.0, 1.0), (1.5, 1.0), (2.0, 1.0), (1.5, 0.5))
        fams = tuple(
            (f"R_GB={g},R_GF={f}", _fig_base(Scenario.II, radio=RadioConfig(rate_GB=g, rate_GF=f), **common))
            for g, f in rates
        )
        desc = "Scenario II, target-rate family"
    else:
        raise SpecError("figure", f"unknown id {fig_id!r} (fig1..fig6)")
    swept = fams[0][1].swept_user.value
    return FigurePreset(fig_id, desc, fams, f"rho_{swept} [dB]")


FIGURE_IDS = tuple(f"fig{i}" for i in range(1, 7))


def with_overrides(spec: RunSpec, **kw) -> RunSpec:
    return replace(spec, **{k: v for k, v in kw.items() if v is not None})
