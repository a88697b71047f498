"""Run configuration: INI files with a single ``[run]`` section plus CLI overrides.

Example::

    [run]
    r = 3
    mode = point
    variants = js, z, yc, oweno
    backend = dd
    levels = 6
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path
from typing import Any

from oweno.core import Variant, WeightParams, default_params, default_s1
from oweno.fields import Field, get_field
from oweno.tables import R_MAX, R_MIN, DataMode, UnsupportedOrder


class ConfigError(ValueError):
    def __init__(
        self, message: str, line: int | None = None, path: str | None = None, key: str | None = None
    ) -> None:
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)
        self.message = message
        self.line = line
        self.key = key


def _int_list(text: str) -> list[int]:
    return [int(tok) for tok in re.split(r"[,\s]+", text.strip()) if tok]


def _str_list(text: str) -> list[str]:
    return [tok for tok in re.split(r"[,\s]+", text.strip()) if tok]


@dataclass(frozen=True)
class RunConfig:
    r: int = 3
    mode: DataMode = DataMode.POINT
    variants: tuple[Variant, ...] = (Variant.JS, Variant.Z, Variant.YC, Variant.OWENO)
    s1: int | None = None
    s2: Fraction | None = None
    eps: float | None = None
    abs_mode: bool = False
    backend: str = "dd"
    output_dir: Path = Path(".")
    levels: int = 6
    k: tuple[int, ...] | None = None
    theta: tuple[int, ...] | None = None
    problem: str = "advection"
    N: tuple[int, ...] = (40, 80, 160, 320, 640)
    cfl: float | None = None
    T: float | None = None
    trace: Path | None = None

    def field(self) -> Field:
        return get_field(self.backend)

    def params(self, variant: Variant, default_eps: float | None = None) -> WeightParams:
        eps = self.eps if self.eps is not None else default_eps
        if eps is None:
            eps = default_params(variant, self.r).eps
        return WeightParams(
            variant,
            s1=self.s1 if self.s1 is not None else default_s1(self.r),
            s2=self.s2 if self.s2 is not None else Fraction(1),
            eps=eps,
            abs_mode=self.abs_mode,
        ).validate(self.r)

    def validate(self) -> RunConfig:
        """Check every field, including the weight parameters of each variant."""
        if not R_MIN <= self.r <= R_MAX:
            raise UnsupportedOrder(f"r = {self.r} outside the supported range {R_MIN}..{R_MAX}")
        if not self.variants:
            raise ConfigError("variant list is empty", key="variants")
        if self.levels < 4:
            raise ConfigError("levels must be at least 4", key="levels")
        if not self.N or min(self.N) < 1:
            raise ConfigError("N list must hold positive sizes", key="N")
        if self.cfl is not None and not 0 < self.cfl <= 1:
            raise ConfigError(f"cfl must lie in (0, 1], got {self.cfl}", key="cfl")
        if self.T is not None and self.T < 0:
            raise ConfigError("T must be nonnegative", key="T")
        try:
            self.field()
        except ValueError as exc:
            raise ConfigError(str(exc), key="backend") from None
        for v in self.variants:
            try:
                self.params(v, default_eps=1e-100)
            except ValueError as exc:
                msg = str(exc)
                key = next((k for k in ("s1", "s2", "eps") if msg.startswith(k) or f"{k} " in msg), "s1")
                raise ConfigError(msg, key=key) from None
        return self


_CONVERTERS: dict[str, Any] = {
    "r": int,
    "mode": DataMode.parse,
    "variants": lambda s: tuple(Variant.parse(v) for v in _str_list(s)),
    "s1": int,
    "s2": Fraction,
    "eps": float,
    "abs_mode": lambda s: s.strip().lower() in ("1", "true", "yes", "on"),
    "backend": str.strip,
    "output_dir": Path,
    "levels": int,
    "k": lambda s: tuple(_int_list(s)),
    "theta": lambda s: tuple(_int_list(s)),
    "problem": str.strip,
    "N": lambda s: tuple(_int_list(s)),
    "cfl": float,
    "T": float,
    "trace": Path,
}


def _line_of(text: str, pattern: str) -> int | None:
    rx = re.compile(pattern, re.IGNORECASE)
    for lineno, line in enumerate(text.splitlines(), start=1):
        if rx.match(line):
            return lineno
    return None


def parse_config(text: str, path: str | None = None, base: RunConfig | None = None) -> RunConfig:
    """Parse ``[run]`` key/value pairs; unknown sections or keys are errors."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keep "N" and "T" case-sensitive
    try:
        parser.read_string(text, source=path or "<config>")
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        raise ConfigError(str(exc).splitlines()[0], line, path) from None

    for section in parser.sections():
        if section != "run":
            raise ConfigError(f"unknown section [{section}]", _line_of(text, rf"\s*\[{re.escape(section)}\]"), path)

    values: dict[str, Any] = {}
    if parser.has_section("run"):
        for key, raw in parser.items("run"):
            line = _line_of(text, rf"\s*{re.escape(key)}\s*[=:]")
            if key not in _CONVERTERS:
                raise ConfigError(f"unknown key {key!r}", line, path)
            try:
                values[key] = _CONVERTERS[key](raw)
            except (ValueError, ZeroDivisionError) as exc:
                raise ConfigError(f"bad value for {key!r}: {exc}", line, path) from None

    config = replace(base or RunConfig(), **values)
    try:
        return config.validate()
    except ConfigError as exc:
        line = _line_of(text, rf"\s*{re.escape(exc.key)}\s*[=:]") if exc.key else None
        raise ConfigError(exc.message, line, path, exc.key) from None


def load_config(path: str | Path, base: RunConfig | None = None) -> RunConfig:
    path = Path(path)
    return parse_config(path.read_text(), str(path), base)


def apply_overrides(config: RunConfig, overrides: dict[str, Any]) -> RunConfig:
    """Overlay CLI values (``None`` means not given) and revalidate."""
    given = {k: v for k, v in overrides.items() if v is not None}
    unknown = set(given) - set(_CONVERTERS)
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}")
    return replace(config, **given).validate()
