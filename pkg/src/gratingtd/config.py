"""Run configuration: ``key = value`` sections parsed with strict validation."""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field, fields
from pathlib import Path

from .incidence import IncidentPulse, load_pulse_table
from .medium import MediumModel, build_binary_grating, build_layered, lamellar_profile
from .timedomain import SweepPlan, make_plan

__all__ = ["ConfigError", "RunConfig", "parse_config", "parse_config_string", "build_medium", "build_pulse", "build_plan"]


class ConfigError(ValueError):
    def __init__(self, code: str, detail: str, path: str | None = None, line: int | None = None):
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(f"{where}{code}: {detail}")
        self.code = code
        self.line = line


@dataclass
class MediumSection:
    kind: str = "homogeneous"
    period: float = 1.0
    h1: float = 0.5
    h2: float = 0.0
    eps1: float = 1.0
    mu1: float = 1.0
    eps2: float | None = None
    mu2: float | None = None
    # layered: "z_top eps mu" entries below the top layer, separated by ';'
    layers: str = ""
    # lamellar
    z_low: float = 0.15
    z_high: float = 0.35
    duty: float = 0.5
    polarization: str = "TE"


@dataclass
class PulseSection:
    shape: str = "polyexp"
    order: int = 4
    sigma: float = 0.1
    amplitude: float = 1.0
    delay: float = 1.0
    theta: float = math.pi / 3
    direction: str = "down"
    table: str = ""


@dataclass
class GridSection:
    nx: int = 64
    nz: int = 64
    convergence_sizes: str = "16 32 64"


@dataclass
class SweepSection:
    tolerance: float = 1e-6
    kappa: float = 4.0
    alias_factor: float = 1.2
    s1: float | None = None
    smax: float | None = None
    ns: int | None = None


@dataclass
class TimeSection:
    T: float = 8.0
    nt: int | None = None


@dataclass
class OutputSection:
    snapshot_times: str = "2.0 4.0 6.0"
    figures: bool = True


@dataclass
class CheckSection:
    branch_samples: int = 100000
    traces: int = 1000
    fields: int = 1000
    frequencies: int = 20
    coercivity_fields: int = 500


@dataclass
class RunConfig:
    medium: MediumSection = field(default_factory=MediumSection)
    pulse: PulseSection = field(default_factory=PulseSection)
    grid: GridSection = field(default_factory=GridSection)
    sweep: SweepSection = field(default_factory=SweepSection)
    time: TimeSection = field(default_factory=TimeSection)
    output: OutputSection = field(default_factory=OutputSection)
    check: CheckSection = field(default_factory=CheckSection)
    source: str | None = None

    @property
    def snapshot_times(self) -> list[float]:
        return [float(v) for v in self.output.snapshot_times.split()]

    @property
    def convergence_sizes(self) -> list[int]:
        return [int(v) for v in self.grid.convergence_sizes.split()]


_SECTION_TYPES = {
    "medium": MediumSection,
    "pulse": PulseSection,
    "grid": GridSection,
    "sweep": SweepSection,
    "time": TimeSection,
    "output": OutputSection,
    "check": CheckSection,
}


def _key_lines(text: str) -> dict[tuple[str, str], int]:
    """Line number of every ``key = value`` entry, for error messages."""
    out, section = {}, None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        m = re.match(r"\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip()
            continue
        m = re.match(r"([^=:]+)[=:]", line)
        if m and section is not None:
            out.setdefault((section, m.group(1).strip().lower()), lineno)
    return out


def _convert(raw: str, default, annotation: str, where: str):
    kind = annotation.replace(" | None", "")
    try:
        if kind == "bool":
            low = raw.strip().lower()
            if low in ("1", "yes", "true", "on"):
                return True
            if low in ("0", "no", "false", "off"):
                return False
            raise ValueError(raw)
        if kind == "int":
            val = float(raw)
            if val != int(val):
                raise ValueError(raw)
            return int(val)
        if kind == "float":
            return float(raw)
        return raw.strip()
    except ValueError:
        raise ConfigError("bad_value", f"{where} = {raw!r} is not a valid {kind}") from None


def parse_config_string(text: str, path: str = "<string>", base_dir: str | Path | None = None) -> RunConfig:
    """Parse config text; relative table paths resolve against ``base_dir``."""
    lines = _key_lines(text)
    parser = configparser.ConfigParser(strict=True, interpolation=None, inline_comment_prefixes=("#",))
    try:
        parser.read_string(text, source=path)
    except configparser.DuplicateOptionError as exc:
        raise ConfigError("duplicate_key", f"[{exc.section}] {exc.option}", path, exc.lineno) from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError("duplicate_key", f"section [{exc.section}] repeated", path, exc.lineno) from None
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("syntax", "entry before any [section] header", path, exc.lineno) from None
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ConfigError("syntax", "cannot parse line", path, lineno) from None

    cfg = RunConfig(source=path)
    for name in parser.sections():
        if name not in _SECTION_TYPES:
            raise ConfigError("unknown_section", f"[{name}]", path)
        section = getattr(cfg, name)
        known = {f.name.lower(): f for f in fields(_SECTION_TYPES[name])}
        for key, raw in parser.items(name):
            line = lines.get((name, key))
            if key not in known:
                raise ConfigError("unknown_key", f"[{name}] {key}", path, line)
            f = known[key]
            try:
                value = _convert(raw, f.default, str(f.type), f"{name}.{f.name}")
            except ConfigError as exc:
                raise ConfigError(exc.code, str(exc).split(": ", 1)[-1], path, line) from None
            setattr(section, f.name, value)
    if cfg.pulse.table and base_dir is not None and not Path(cfg.pulse.table).is_absolute():
        cfg.pulse.table = str((Path(base_dir) / cfg.pulse.table).resolve())
    _check_ranges(cfg, path, lines)
    return cfg


def parse_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("unreadable", str(exc), str(path)) from None
    return parse_config_string(text, str(path), path.parent)


def _is_pow2(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def _check_ranges(cfg: RunConfig, path, lines):
    def fail(section, key, msg):
        raise ConfigError("range", f"{section}.{key}: {msg}", path, lines.get((section, key.lower())))

    m, p, g, sw, tm = cfg.medium, cfg.pulse, cfg.grid, cfg.sweep, cfg.time
    if m.kind not in ("homogeneous", "layered", "lamellar"):
        fail("medium", "kind", f"must be homogeneous, layered or lamellar, got {m.kind!r}")
    if not m.period > 0:
        fail("medium", "period", "must be positive")
    if not m.h2 < m.h1:
        fail("medium", "h1", f"need h2 < h1, got h2={m.h2}, h1={m.h1}")
    for key in ("eps1", "mu1", "eps2", "mu2"):
        v = getattr(m, key)
        if v is not None and not v > 0:
            fail("medium", key, "must be positive")
    if m.polarization not in ("TE", "TM"):
        fail("medium", "polarization", "must be TE or TM")
    if m.kind == "layered":
        try:
            _layer_entries(m)
        except ValueError as exc:
            fail("medium", "layers", str(exc))
    if m.kind == "lamellar":
        if not m.h2 < m.z_low < m.z_high < m.h1:
            fail("medium", "z_low", f"need h2 < z_low < z_high < h1, got {m.z_low}, {m.z_high}")
        if not 0 < m.duty < 1:
            fail("medium", "duty", "must lie in the open interval (0, 1)")
    if not 0 < p.theta < math.pi:
        fail("pulse", "theta", f"must lie in the open interval (0, pi), got {p.theta}")
    if p.shape not in ("polyexp", "tabulated"):
        fail("pulse", "shape", "must be polyexp or tabulated")
    if p.shape == "polyexp" and p.order < 3:
        fail("pulse", "order", f"must be >= 3 (three continuous derivatives at onset), got {p.order}")
    if p.shape == "tabulated" and not p.table:
        fail("pulse", "table", "tabulated pulse needs a table path")
    if not p.sigma > 0:
        fail("pulse", "sigma", "must be positive")
    if not p.delay >= 0:
        fail("pulse", "delay", "must be nonnegative")
    if p.direction not in ("down", "up"):
        fail("pulse", "direction", "must be down or up")
    if not _is_pow2(g.nx):
        fail("grid", "nx", f"must be a power of two, got {g.nx}")
    if g.nz < 1:
        fail("grid", "nz", "must be >= 1")
    try:
        sizes = cfg.convergence_sizes
    except ValueError:
        fail("grid", "convergence_sizes", "must be a list of integers")
    if len(sizes) < 2 or any(not _is_pow2(n) for n in sizes):
        fail("grid", "convergence_sizes", "need at least two powers of two")
    if not 0 < sw.tolerance < 1:
        fail("sweep", "tolerance", "must lie in (0, 1)")
    if not sw.kappa > 0:
        fail("sweep", "kappa", "must be positive")
    if sw.alias_factor < 1.2:
        fail("sweep", "alias_factor", "must be >= 1.2")
    if sw.s1 is not None and not sw.s1 > 0:
        fail("sweep", "s1", "must be positive")
    if sw.ns is not None and sw.ns < 2:
        fail("sweep", "ns", "must be >= 2")
    if not tm.T > 0:
        fail("time", "T", "must be positive")
    if tm.nt is not None and tm.nt < 4:
        fail("time", "nt", "must be >= 4")
    try:
        times = cfg.snapshot_times
    except ValueError:
        fail("output", "snapshot_times", "must be a list of numbers")
    if any(not 0 <= t <= tm.T for t in times):
        fail("output", "snapshot_times", f"times must lie in [0, T={tm.T}]")
    for key in ("branch_samples", "traces", "fields", "frequencies", "coercivity_fields"):
        if getattr(cfg.check, key) < 1:
            fail("check", key, "must be >= 1")
    try:
        build_plan(cfg, build_pulse(cfg))
    except ValueError as exc:
        fail("sweep", "s1", str(exc))


def _layer_entries(m: MediumSection) -> list[tuple[float, float, float]]:
    out = []
    for chunk in filter(None, (c.strip() for c in m.layers.split(";"))):
        parts = chunk.split()
        if len(parts) != 3:
            raise ValueError(f"layer entry {chunk!r} needs 'z_top eps mu'")
        out.append(tuple(float(v) for v in parts))
    return out


def build_medium(cfg: RunConfig, nx: int | None = None, nz: int | None = None) -> MediumModel:
    """Medium on the configured (or overridden) grid; raises ``MediumError`` on invalid input."""
    m = cfg.medium
    nx = cfg.grid.nx if nx is None else nx
    nz = cfg.grid.nz if nz is None else nz
    if m.kind == "homogeneous":
        return build_layered([(m.h1, m.eps1, m.mu1)], m.period, m.h1, m.h2, nx, nz,
                             eps2=m.eps2, mu2=m.mu2, polarization=m.polarization)
    if m.kind == "layered":
        layers = [(m.h1, m.eps1, m.mu1)] + _layer_entries(m)
        return build_layered(layers, m.period, m.h1, m.h2, nx, nz, eps2=m.eps2, mu2=m.mu2,
                             polarization=m.polarization)
    eps2 = m.eps1 if m.eps2 is None else m.eps2
    mu2 = m.mu1 if m.mu2 is None else m.mu2
    profile = lamellar_profile(m.z_low, m.z_high, m.duty, m.period)
    return build_binary_grating(profile, m.eps1, m.mu1, eps2, mu2, m.period, m.h1, m.h2, nx, nz,
                                polarization=m.polarization)


def build_pulse(cfg: RunConfig) -> IncidentPulse:
    p, m = cfg.pulse, cfg.medium
    table = None
    if p.shape == "tabulated":
        tau, f = load_pulse_table(p.table)
        table = (tuple(tau), tuple(f))
    return IncidentPulse(order=p.order, sigma=p.sigma, amplitude=p.amplitude, delay=p.delay, theta=p.theta,
                         eps1mu1=m.eps1 * m.mu1, shape=p.shape, direction=p.direction, table=table)


def build_plan(cfg: RunConfig, pulse: IncidentPulse) -> SweepPlan:
    sw = cfg.sweep
    return make_plan(pulse, cfg.time.T, s1=sw.s1, smax=sw.smax, ns=sw.ns, nt=cfg.time.nt, delta=sw.tolerance,
                     kappa=sw.kappa, alias_factor=sw.alias_factor)
