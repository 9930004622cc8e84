"""Run configuration: defaults < key=value file < command-line flags."""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Mapping, Optional

from .errors import ConfigError
from .numeric_spectra import Discretization, Thresholds
from .profiles import FSmoothing, RhoSmoothing

OUTPUT_FORMATS = ("json", "csv")


@dataclass(frozen=True)
class RunConfig:
    R: float = 12.0
    h: float = 0.01
    tau_zero: float = 1e-6
    tau_gap: float = 1e-3
    jobs: int = 1
    output: str = "json"
    rho_smoothing: str = RhoSmoothing.QUINTIC_SMOOTHSTEP.value
    f_smoothing: str = FSmoothing.QUADRATIC_CAP.value
    # eigenvalues listed per operator in spectral reports
    k: int = 5

    def __post_init__(self) -> None:
        # raises ValueError on bad R, h or thresholds
        self.discretization()
        self.thresholds()
        if self.jobs < 1:
            raise ValueError(f"--jobs must be >= 1, got {self.jobs}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.output not in OUTPUT_FORMATS:
            raise ValueError(f"--output must be one of {OUTPUT_FORMATS}, got {self.output!r}")
        RhoSmoothing(self.rho_smoothing)
        FSmoothing(self.f_smoothing)

    def discretization(self) -> Discretization:
        return Discretization(R=self.R, h=self.h)

    def thresholds(self) -> Thresholds:
        return Thresholds(tau_zero=self.tau_zero, tau_gap=self.tau_gap)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RunConfig":
        known = [f.name for f in fields(cls)]
        unknown = sorted(set(data) - set(known))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        defaults = cls()
        values = {}
        for name in known:
            if name not in data or data[name] is None:
                continue
            current = getattr(defaults, name)
            try:
                values[name] = type(current)(data[name])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {name}: {data[name]!r}") from exc
        return replace(defaults, **values)

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        return cls.from_dict(read_config_file(path))

    def merged(self, overrides: Mapping[str, Any]) -> "RunConfig":
        """Copy with every non-None override applied."""
        values = {key: value for key, value in overrides.items() if value is not None}
        return replace(self, **values)


def read_config_file(path: str | Path) -> dict[str, str]:
    """Parse key=value lines; '#' starts a comment."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {p}: {exc}") from exc
    data: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"{p}:{lineno}: expected key=value, got {raw!r}")
        data[key.strip()] = value.strip()
    return data


def resolve_config(config_path: Optional[str | Path], overrides: Mapping[str, Any]) -> RunConfig:
    base = RunConfig.load(config_path) if config_path else RunConfig()
    return base.merged(overrides)
