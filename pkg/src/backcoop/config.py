"""TOML configuration files.

Sections ``[system]``, ``[gains]``, ``[topology]``, ``[policy]``,
``[solver]``, ``[sweep]`` and ``[ber]``; keys are the field names of the
corresponding records.  Explicit ``[gains]`` take precedence over
``[topology]``.
"""
from __future__ import annotations

import re
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .model import ChannelGains, DomainError, SystemParams, Topology, gains_from_topology, validate
from .rates import HarvestPolicy
from .solver import SolverConfig


class ConfigError(DomainError):
    """A configuration file could not be parsed or failed validation."""


@dataclass(frozen=True)
class Config:
    params: SystemParams = SystemParams()
    gains: Optional[ChannelGains] = None
    topology: Optional[Topology] = None
    policy: HarvestPolicy = HarvestPolicy()
    solver: SolverConfig = SolverConfig()
    sweep: dict = field(default_factory=dict)
    ber: dict = field(default_factory=dict)

    def resolve_gains(self) -> ChannelGains:
        if self.gains is not None:
            return self.gains
        if self.topology is not None:
            return gains_from_topology(self.topology, self.params)
        raise ConfigError("configuration needs a [gains] or [topology] section")

    def as_dict(self) -> dict[str, Any]:
        """Fully resolved configuration, for provenance headers."""
        out: dict[str, Any] = {"system": _record(self.params)}
        if self.gains is not None:
            out["gains"] = _record(self.gains)
        if self.topology is not None:
            out["topology"] = _record(self.topology)
        out["policy"] = {"own_slot_mode": self.policy.own_slot_mode.value,
                         "include_cross_term": self.policy.include_cross_term}
        out["solver"] = _record(self.solver)
        if self.sweep:
            out["sweep"] = self.sweep
        if self.ber:
            out["ber"] = self.ber
        return out


def _record(obj) -> dict[str, Any]:
    return {f.name: getattr(obj, f.name) for f in fields(obj)}


def _line_of(text: str, section: str, key: str) -> Optional[int]:
    """1-based line of ``key`` inside ``[section]``, if it can be located."""
    current = None
    for no, line in enumerate(text.splitlines(), 1):
        m = re.match(r"\s*\[([^\]]+)\]", line)
        if m:
            current = m.group(1).strip()
        elif current == section and re.match(rf"\s*{re.escape(key)}\s*=", line):
            return no
    return None


def _where(source: str, text: str, section: str, key: Optional[str] = None) -> str:
    if key is not None:
        line = _line_of(text, section, key)
        if line is not None:
            return f"{source}:{line}"
    return source


def _build(cls, table, section, source, text, coerce=float):
    names = {f.name for f in fields(cls)}
    kw = {}
    for key, value in table.items():
        if key not in names:
            raise ConfigError(f"{_where(source, text, section, key)}: unknown key {key!r} in [{section}]")
        if coerce is not None and isinstance(value, (int, float)) and not isinstance(value, bool):
            value = coerce(value)
        kw[key] = value
    try:
        return cls(**kw)
    except TypeError as exc:
        raise ConfigError(f"{_where(source, text, section)}: [{section}] {exc}") from None


def parse_config(text: str, source: str = "<config>") -> Config:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: {exc}") from None

    known = {"system", "gains", "topology", "policy", "solver", "sweep", "ber"}
    for name in data:
        if name not in known:
            raise ConfigError(f"{source}: unknown section [{name}]")

    params = _build(SystemParams, data.get("system", {}), "system", source, text)
    problems = validate(params)
    if problems:
        raise ConfigError(f"{source}: [system] " + "; ".join(problems))

    gains = None
    if "gains" in data:
        table = dict(data["gains"])
        # a single inter-user gain stands for both directions
        if "h_12" in table and "h_21" not in table:
            table["h_21"] = table["h_12"]
        gains = _build(ChannelGains, table, "gains", source, text)
        problems = validate(None, gains)
        if problems:
            raise ConfigError(f"{source}: [gains] " + "; ".join(problems))

    topology = None
    if "topology" in data:
        topology = _build(Topology, data["topology"], "topology", source, text)
        for f in fields(topology):
            if not getattr(topology, f.name) > 0:
                raise ConfigError(
                    f"{_where(source, text, 'topology', f.name)}: {f.name} must be positive"
                )

    try:
        policy = _build(HarvestPolicy, data.get("policy", {}), "policy", source, text, coerce=None)
        solver_table = dict(data.get("solver", {}))
        for key, kind in (("max_iterations", int), ("energy_levels", int), ("z_tolerance", float),
                          ("inner_tolerance", float), ("grid_resolution", float)):
            if key in solver_table:
                solver_table[key] = kind(solver_table[key])
        solver = _build(SolverConfig, solver_table, "solver", source, text, coerce=None)
    except (DomainError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{source}: {exc}") from None

    return Config(params, gains, topology, policy, solver,
                  dict(data.get("sweep", {})), dict(data.get("ber", {})))


def load_config(path) -> Config:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    return parse_config(text, str(path))
