"""Scenario configuration: YAML text validated into typed, frozen models.

Every section has defaults, so a file only needs ``scenario:`` plus whatever it
overrides. Unknown keys are rejected at every level.
"""

from __future__ import annotations

from typing import Annotated, Literal, Optional

import yaml
from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    ValidationError,
    field_validator,
    model_validator,
)

from .field import GALILEAN, RELATIVISTIC, MomentumGrid

SCENARIOS = (
    "algebra-selftest",
    "bell-check",
    "propagator-sweep",
    "teleport-polarization",
    "teleport-full",
    "nonrel-limit",
)


# a galilean packet that vanishes at k = 0, so the relativistic contrast applies
SCENARIO_DEFAULTS = {
    "nonrel-limit": {
        "grid": {"spacing": 0.4, "index_range": (-16, 16), "convention": GALILEAN},
        "packet": {"center": (0, 0, 5), "sigma": 0.8, "helicity": (0.6, 0.8j),
                   "x_center": (0, 0, 3), "cutoff": 0.0},
    },
}


class ConfigError(ValueError):
    """Collected, field-addressed validation errors."""

    def __init__(self, errors: list):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n" + "\n".join(f"  {e}" for e in self.errors))


def _to_complex(v):
    if isinstance(v, complex):
        return v
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, str):
        try:
            return complex(v.replace(" ", ""))
        except ValueError:
            pass
    raise ValueError("expected a number, [re, im] or a string like '0.6+0.8j'")


Complex = Annotated[complex, BeforeValidator(_to_complex)]
Vec3 = tuple[int, int, int]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GridSpec(_Section):
    spacing: float = Field(0.5, gt=0)
    index_range: tuple[int, int] = (-9, 9)
    convention: Literal["relativistic", "galilean"] = RELATIVISTIC
    collinear: bool = True

    @field_validator("index_range")
    @classmethod
    def _symmetric(cls, v):
        lo, hi = v
        if hi < 1 or lo != -hi:
            raise ValueError(
                f"grid must be symmetric under k -> -k: got [{lo}, {hi}], need [-N, N] with N >= 1"
            )
        return v

    def build(self) -> MomentumGrid:
        return MomentumGrid(self.spacing, self.index_range[1], self.convention, self.collinear)


class PacketSpec(_Section):
    kind: Literal["gaussian", "plane"] = "gaussian"
    center: Vec3 = (0, 0, 8)
    sigma: float = Field(0.3, gt=0)
    helicity: tuple[Complex, Complex] = (1 + 0j, 0.5j)
    x_center: Vec3 = (0, 0, 0)
    cutoff: float = Field(1e-3, ge=0)


class PolarizationSpec(_Section):
    f_plus: Complex = 1 + 0j
    f_minus: Complex = 0j
    k1: Vec3 = (0, 0, 1)
    k2: Vec3 = (0, 0, 2)
    k3: Vec3 = (0, 0, -3)
    random_inputs: int = Field(0, ge=0)

    @model_validator(mode="after")
    def _distinct(self):
        ks = {"k1": self.k1, "k2": self.k2, "k3": self.k3}
        names = list(ks)
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                if ks[a] == ks[b]:
                    raise ValueError(
                        f"{a} = {b} = {list(ks[a])}: the labeled protocol needs pairwise distinct "
                        "momenta k1, k2, k3 (distinct-momenta precondition)"
                    )
        n = abs(self.f_plus) ** 2 + abs(self.f_minus) ** 2
        if abs(n - 1) > 1e-10:
            raise ValueError(f"|f_plus|^2 + |f_minus|^2 = {n:.12g}, must be 1")
        return self


class EprSpec(_Section):
    support: Optional[list[Vec3]] = [(0, 0, 1), (0, 0, 2), (0, 0, 3), (0, 0, 4)]
    x0: float = 0.0


class NonrelSpec(_Section):
    Y: Vec3 = (0, 0, 4)
    P: Vec3 = (0, 0, -3)
    X: Vec3 = (0, 0, -6)
    Q: Vec3 = (0, 0, 5)


class PropagatorSpec(_Section):
    x0: float = 2.0
    r_max: float = Field(4.0, gt=0)
    r_step: float = Field(0.05, gt=0)
    regulator: float = Field(0.02, gt=0)
    compare_half_extent: int = Field(8, ge=1)
    compare_spacing: float = Field(0.5, gt=0)
    smearing_sigma: float = Field(1.2, gt=0)


class AlgebraSpec(_Section):
    n_words: int = Field(200, ge=1)


class ScenarioConfig(_Section):
    scenario: Literal[SCENARIOS]  # type: ignore[valid-type]
    seed: int = 1
    gauge_angle: float = 0.0
    grid: GridSpec = GridSpec()
    packet: PacketSpec = PacketSpec()
    polarization: PolarizationSpec = PolarizationSpec()
    epr: EprSpec = EprSpec()
    nonrel: NonrelSpec = NonrelSpec()
    propagator: PropagatorSpec = PropagatorSpec()
    algebra: AlgebraSpec = AlgebraSpec()

    @model_validator(mode="before")
    @classmethod
    def _scenario_defaults(cls, raw):
        # sections the file leaves out take scenario-appropriate defaults
        if isinstance(raw, dict):
            for section, values in SCENARIO_DEFAULTS.get(raw.get("scenario"), {}).items():
                given = raw.get(section)
                if given is None:
                    raw[section] = dict(values)
                elif isinstance(given, dict):
                    raw[section] = {**values, **given}
        return raw

    @model_validator(mode="after")
    def _lattice_vectors_on_grid(self):
        g = self.grid
        n = g.index_range[1]
        errs = []

        def check(path, v):
            if g.collinear and (v[0] or v[1]):
                errs.append(f"{path} = {list(v)} is off the collinear axis")
            elif any(abs(c) > n for c in v):
                errs.append(f"{path} = {list(v)} outside the grid index range [-{n}, {n}]")

        if self.scenario in ("teleport-full", "nonrel-limit"):
            check("packet.center", self.packet.center)
            check("packet.x_center", self.packet.x_center)
        if self.scenario == "teleport-full":
            for i, v in enumerate(self.epr.support or ()):
                check(f"epr.support[{i}]", v)
                if not any(v) and g.convention == RELATIVISTIC:
                    errs.append(f"epr.support[{i}] is k = 0, which the relativistic grid excludes")
        if self.scenario == "nonrel-limit":
            if g.convention != GALILEAN:
                errs.append("grid.convention must be 'galilean' for nonrel-limit")
            for name in "YPXQ":
                check(f"nonrel.{name}", getattr(self.nonrel, name))
        if errs:
            raise ValueError("; ".join(errs))
        return self


def _format(err: ValidationError) -> list:
    out = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"]) or "<root>"
        msg = e["msg"].removeprefix("Value error, ")
        if e["type"] == "extra_forbidden":
            msg = f"unknown key {e['loc'][-1]!r}"
        out.append(f"{loc}: {msg}")
    return out


def validate_config(text: str, **overrides) -> ScenarioConfig:
    """Parse YAML ``text`` into a ScenarioConfig; raises ConfigError listing every problem.

    ``overrides`` (e.g. ``seed=3``) replace top-level keys before validation.
    """
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError([f"<yaml>: {exc}"]) from None
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(["<root>: expected a mapping of keys to values"])
    raw.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return ScenarioConfig.model_validate(raw)
    except ValidationError as exc:
        raise ConfigError(_format(exc)) from None


def config_echo(cfg: ScenarioConfig) -> dict:
    """JSON-safe dump; complex values become [re, im]."""

    def fix(v):
        if isinstance(v, complex):
            return [v.real, v.imag]
        if isinstance(v, dict):
            return {k: fix(x) for k, x in v.items()}
        if isinstance(v, (list, tuple)):
            return [fix(x) for x in v]
        return v

    return fix(cfg.model_dump())
