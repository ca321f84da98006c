"""TOML run configuration with unit-bearing key names.

A minimal capacity config::

    [link]
    alpha_per_km = 0.05
    length_km = 100.0
    nbar = 100.0

    [amplifiers]
    count = 10                # integer or "continuous"
    regime = "amplitude"      # amplitude | power
    objective = "homodyne"    # homodyne | gh-coherent | gh-optimal
    positions = "equal"       # equal | free

An explicit plan replaces count/regime with ``positions_km`` and ``gains``.
Sweeps add a ``[sweep]`` table; see ``SweepConfig``.
"""
from __future__ import annotations

import hashlib
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .errors import ConfigError

CONTINUOUS = "continuous"
REGIMES = ("amplitude", "power")
OBJECTIVES = ("homodyne", "gh-coherent", "gh-optimal")
POSITION_MODES = ("equal", "free")


@dataclass(frozen=True)
class PointSpec:
    """One link to evaluate. ``count`` is an int or ``"continuous"``."""

    alpha: float
    length: float
    nbar: float
    count: int | str = 0
    regime: str = "amplitude"
    objective: str = "homodyne"
    positions: str = "equal"
    plan_positions: tuple[float, ...] | None = None
    plan_gains: tuple[float, ...] | None = None
    gh: bool = True
    asymptotes: bool = False

    @property
    def regime_label(self) -> str:
        if self.plan_positions is not None:
            return "explicit"
        return "none" if self.count == 0 else self.regime


@dataclass(frozen=True)
class SweepConfig:
    alpha: float
    lengths: tuple[float, ...]
    nbars: tuple[float, ...]
    counts: tuple[int | str, ...]
    regimes: tuple[str, ...]
    objective: str = "homodyne"
    positions: str = "equal"
    gh: bool = True
    asymptotes: bool = False

    def points(self) -> list[PointSpec]:
        """All sweep points in output order: nbar, then regime, then count, then length."""
        out = []
        for nbar in self.nbars:
            for regime in self.regimes:
                for count in self.counts:
                    if count == 0 and regime != self.regimes[0]:
                        continue  # no amplifiers means the regime is irrelevant
                    for length in self.lengths:
                        out.append(PointSpec(self.alpha, length, nbar, count, regime, self.objective,
                                             self.positions, gh=self.gh, asymptotes=self.asymptotes))
        return out


@dataclass
class LoadedConfig:
    path: Path | None
    data: dict[str, Any]
    digest: str = field(default="")


def load(path: str | Path) -> LoadedConfig:
    p = Path(path)
    try:
        raw = p.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", "--config") from exc
    try:
        data = tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"invalid TOML: {exc}", "--config") from exc
    return LoadedConfig(p, data, hashlib.sha256(raw).hexdigest())


def _table(data, name, required=True) -> dict:
    t = data.get(name)
    if t is None:
        if required:
            raise ConfigError(f"missing [{name}] table", name)
        return {}
    if not isinstance(t, dict):
        raise ConfigError(f"[{name}] must be a table", name)
    return t


def _number(t, key, where, default=None, minimum=None, strict=False) -> float:
    name = f"{where}.{key}"
    if key not in t:
        if default is None:
            raise ConfigError("required field is missing", name)
        return default
    v = t[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"expected a finite number, got {v!r}", name)
    v = float(v)
    if minimum is not None and (v < minimum or (strict and v == minimum)):
        raise ConfigError(f"must be {'>' if strict else '>='} {minimum}, got {v}", name)
    return v


def _choice(t, key, where, options, default):
    v = t.get(key, default)
    if v not in options:
        raise ConfigError(f"must be one of {list(options)}, got {v!r}", f"{where}.{key}")
    return v


def _bool(t, key, where, default):
    v = t.get(key, default)
    if not isinstance(v, bool):
        raise ConfigError(f"expected true or false, got {v!r}", f"{where}.{key}")
    return v


def _count(v, name) -> int | str:
    if v == CONTINUOUS:
        return CONTINUOUS
    if isinstance(v, bool) or not isinstance(v, int) or v < 0:
        raise ConfigError(f"expected a non-negative integer or \"continuous\", got {v!r}", name)
    return v


def _number_list(v, name, minimum=0.0) -> tuple[float, ...]:
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        v = [v]
    if not isinstance(v, list):
        raise ConfigError("expected a number or a list of numbers", name)
    out = []
    for x in v:
        if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x) or x < minimum:
            raise ConfigError(f"entries must be finite numbers >= {minimum}, got {x!r}", name)
        out.append(float(x))
    return tuple(out)


def point_spec(cfg: LoadedConfig) -> PointSpec:
    """Single-link config for ``capacity`` and ``optimize``."""
    link = _table(cfg.data, "link")
    amps = _table(cfg.data, "amplifiers", required=False)
    out = _table(cfg.data, "output", required=False)
    alpha = _number(link, "alpha_per_km", "link", minimum=0.0)
    length = _number(link, "length_km", "link", minimum=0.0, strict=True)
    nbar = _number(link, "nbar", "link", minimum=0.0)
    gh = _bool(out, "gh", "output", True)
    asym = _bool(out, "asymptotes", "output", False)
    if "positions_km" in amps or "gains" in amps:
        pos = _number_list(amps.get("positions_km", []), "amplifiers.positions_km")
        gains = _number_list(amps.get("gains", []), "amplifiers.gains")
        if len(pos) != len(gains):
            raise ConfigError("positions_km and gains must have equal length", "amplifiers.gains")
        if any(g <= 0 for g in gains):
            raise ConfigError("gains must be > 0", "amplifiers.gains")
        if any(not (a < b) for a, b in zip((0.0,) + pos, pos)) or (pos and pos[-1] > length):
            raise ConfigError("positions must be strictly increasing inside (0, length_km]",
                              "amplifiers.positions_km")
        regime = _choice(amps, "regime", "amplifiers", ("explicit",) + REGIMES, "explicit")
        return PointSpec(alpha, length, nbar, len(pos), regime, plan_positions=pos, plan_gains=gains,
                         gh=gh, asymptotes=asym)
    count = _count(amps.get("count", 0), "amplifiers.count")
    return PointSpec(
        alpha, length, nbar, count,
        _choice(amps, "regime", "amplifiers", REGIMES, "amplitude"),
        _choice(amps, "objective", "amplifiers", OBJECTIVES, "homodyne"),
        _choice(amps, "positions", "amplifiers", POSITION_MODES, "equal"),
        gh=gh, asymptotes=asym,
    )


def _lengths(sweep) -> tuple[float, ...]:
    if "lengths_km" in sweep:
        vals = _number_list(sweep["lengths_km"], "sweep.lengths_km")
        if any(v <= 0 for v in vals):
            raise ConfigError("lengths must be > 0", "sweep.lengths_km")
        return vals
    start = _number(sweep, "length_start_km", "sweep", minimum=0.0, strict=True)
    stop = _number(sweep, "length_stop_km", "sweep", minimum=0.0)
    step = _number(sweep, "length_step_km", "sweep", minimum=0.0, strict=True)
    # half-open [start, stop), like range(); a zero-length range yields no points
    n = max(0, math.ceil((stop - start) / step - 1e-9))
    return tuple(start + k * step for k in range(n))


def sweep_config(cfg: LoadedConfig) -> SweepConfig:
    link = _table(cfg.data, "link")
    sweep = _table(cfg.data, "sweep")
    out = _table(cfg.data, "output", required=False)
    alpha = _number(link, "alpha_per_km", "link", minimum=0.0)
    nbars = _number_list(sweep.get("nbar", link.get("nbar")), "sweep.nbar")
    if not nbars:
        raise ConfigError("at least one nbar is required", "sweep.nbar")
    counts_raw = sweep.get("counts", [0])
    if not isinstance(counts_raw, list):
        counts_raw = [counts_raw]
    counts = tuple(_count(c, "sweep.counts") for c in counts_raw)
    regimes = sweep.get("regimes", ["amplitude"])
    if isinstance(regimes, str):
        regimes = [regimes]
    for r in regimes:
        if r not in REGIMES:
            raise ConfigError(f"must be one of {list(REGIMES)}, got {r!r}", "sweep.regimes")
    if not regimes:
        raise ConfigError("at least one regime is required", "sweep.regimes")
    return SweepConfig(
        alpha, _lengths(sweep), nbars, counts, tuple(regimes),
        _choice(sweep, "objective", "sweep", OBJECTIVES, "homodyne"),
        _choice(sweep, "positions", "sweep", POSITION_MODES, "equal"),
        _bool(out, "gh", "output", True), _bool(out, "asymptotes", "output", False),
    )


def validate_tolerances(cfg: LoadedConfig | None) -> dict[str, float]:
    """Tolerances of the ``validate`` command, overridable under ``[validate]``."""
    tol = {
        "ode_rel_tol": 1e-6,
        "mc_sigmas": 3.0,
        "grid_rel_tol": 1e-3,
        "pure_loss_tol": 1e-10,
    }
    if cfg is None:
        return tol
    t = _table(cfg.data, "validate", required=False)
    for key in list(tol):
        tol[key] = _number(t, key, "validate", default=tol[key], minimum=0.0)
    unknown = set(t) - set(tol)
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}", "validate")
    return tol
