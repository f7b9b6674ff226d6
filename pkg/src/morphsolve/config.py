"""Flat ``key = value`` run configuration.

One pair per line, ``#`` starts a comment, vectors are comma separated::

    b = 100,10,10,10,10
    c = 10,10,1,10,10
    p1 = 100
    p3 = 100
    d = 0.1

Setting ``dimensional = true`` replaces b, c, p1, p3, d by the sixteen raw
rates of :class:`~morphsolve.model.DimensionalParameters`.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

from .model import DimensionalParameters, Params, nondimensionalize
from .steady import MODES, SteadyOptions


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line
        self.key = key


DEFAULTS = {
    "grid_n": 512,
    "mode": "singular-split",
    "dt": 1e-3,
    "t_end": 10.0,
    "stride": 100,
    "tol": 1e-10,
    "max_iter": 10_000,
    "damping": 1.0,
    "output_dir": ".",
    "emit_svg": False,
    "dimensional": False,
}

NONDIM_KEYS = ("b", "c", "p1", "p3", "d")
DIM_KEYS = tuple(f.name for f in fields(DimensionalParameters))
SCALAR_PARAM_KEYS = ("d", "p1", "p3") + tuple(f"{v}{i}" for v in "bc" for i in range(1, 6))


@dataclass(frozen=True)
class RunConfig:
    params: Params
    grid_n: int = 512
    mode: str = "singular-split"
    dt: float = 1e-3
    t_end: float = 10.0
    stride: int = 100
    tol: float = 1e-10
    max_iter: int = 10_000
    damping: float = 1.0
    output_dir: Path = Path(".")
    emit_svg: bool = False
    dimensional: DimensionalParameters | None = None

    @property
    def steady_options(self) -> SteadyOptions:
        return SteadyOptions(tol=self.tol, max_iter=self.max_iter, damping=self.damping)


def _split_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError("empty key", line=lineno)
        yield lineno, key, value


def _float(key: str, value: str, line: int) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{key} must be a number, got {value!r}", line=line, key=key) from None


def _int(key: str, value: str, line: int) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {value!r}", line=line, key=key) from None


def _bool(key: str, value: str, line: int) -> bool:
    v = value.lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key} must be a boolean, got {value!r}", line=line, key=key)


def _vector(key: str, value: str, line: int) -> tuple[float, ...]:
    parts = [p.strip() for p in value.split(",")]
    if len(parts) != 5:
        raise ConfigError(f"{key} must have 5 comma-separated entries, got {len(parts)}", line=line, key=key)
    return tuple(_float(key, p, line) for p in parts)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a configuration document."""
    raw: dict[str, tuple[int, str]] = {}
    known = set(DEFAULTS) | set(NONDIM_KEYS) | set(DIM_KEYS)
    for lineno, key, value in _split_lines(text):
        if key not in known:
            raise ConfigError(f"unknown key {key!r}", line=lineno, key=key)
        if key in raw:
            raise ConfigError(f"duplicate key {key!r} (first on line {raw[key][0]})", line=lineno, key=key)
        raw[key] = (lineno, value)

    vals: dict = dict(DEFAULTS)
    conv = {
        "grid_n": _int,
        "stride": _int,
        "max_iter": _int,
        "dt": _float,
        "t_end": _float,
        "tol": _float,
        "damping": _float,
        "emit_svg": _bool,
        "dimensional": _bool,
    }
    for key, fn in conv.items():
        if key in raw:
            line, value = raw[key]
            vals[key] = fn(key, value, line)
    if "mode" in raw:
        line, value = raw["mode"]
        if value not in MODES:
            raise ConfigError(f"mode must be one of {', '.join(MODES)}, got {value!r}", line=line, key="mode")
        vals["mode"] = value
    if "output_dir" in raw:
        vals["output_dir"] = raw["output_dir"][1]

    dim = None
    if vals["dimensional"]:
        stray = [k for k in NONDIM_KEYS if k in raw]
        if stray:
            raise ConfigError(f"{stray[0]} not allowed with dimensional = true", line=raw[stray[0]][0], key=stray[0])
        missing = [k for k in DIM_KEYS if k not in raw]
        if missing:
            raise ConfigError(f"missing required keys: {', '.join(missing)}", key=missing[0])
        kw = {k: _float(k, raw[k][1], raw[k][0]) for k in DIM_KEYS}
        try:
            dim = DimensionalParameters(**kw)
            params = nondimensionalize(dim)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    else:
        stray = [k for k in DIM_KEYS if k in raw]
        if stray:
            raise ConfigError(f"{stray[0]} needs dimensional = true", line=raw[stray[0]][0], key=stray[0])
        missing = [k for k in NONDIM_KEYS if k not in raw]
        if missing:
            raise ConfigError(f"missing required keys: {', '.join(missing)}", key=missing[0])
        b = _vector("b", raw["b"][1], raw["b"][0])
        c = _vector("c", raw["c"][1], raw["c"][0])
        scalars = {k: _float(k, raw[k][1], raw[k][0]) for k in ("p1", "p3", "d")}
        for key, test, what in (
            ("b", all(v > 0 for v in b), "strictly positive"),
            ("c", all(v >= 0 for v in c), "nonnegative"),
            ("d", scalars["d"] > 0, "strictly positive"),
            ("p1", scalars["p1"] >= 0, "nonnegative"),
            ("p3", scalars["p3"] >= 0, "nonnegative"),
        ):
            if not test:
                raise ConfigError(f"{key} must be {what}", line=raw[key][0], key=key)
        params = Params(d=scalars["d"], b=b, c=c, p1=scalars["p1"], p3=scalars["p3"])

    _validate_controls(vals, raw)
    return RunConfig(
        params=params,
        grid_n=vals["grid_n"],
        mode=vals["mode"],
        dt=vals["dt"],
        t_end=vals["t_end"],
        stride=vals["stride"],
        tol=vals["tol"],
        max_iter=vals["max_iter"],
        damping=vals["damping"],
        output_dir=Path(vals["output_dir"]),
        emit_svg=vals["emit_svg"],
        dimensional=dim,
    )


def _validate_controls(vals: dict, raw: dict) -> None:
    checks = (
        ("grid_n", vals["grid_n"] >= 4 and vals["grid_n"] % 2 == 0, "an even integer >= 4"),
        ("dt", vals["dt"] > 0, "positive"),
        ("t_end", vals["t_end"] > 0, "positive"),
        ("stride", vals["stride"] >= 1, ">= 1"),
        ("tol", vals["tol"] > 0, "positive"),
        ("max_iter", vals["max_iter"] >= 1, ">= 1"),
        ("damping", 0 < vals["damping"] <= 1, "in (0, 1]"),
    )
    for key, ok, what in checks:
        if not ok:
            line = raw[key][0] if key in raw else None
            raise ConfigError(f"{key} must be {what}, got {vals[key]!r}", line=line, key=key)


def load_config(path: str | Path) -> RunConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def with_param(cfg: RunConfig, key: str, value: float) -> RunConfig:
    """Copy of ``cfg`` with one scalar model parameter replaced."""
    if key not in SCALAR_PARAM_KEYS:
        raise ConfigError(f"sweep key must be one of {', '.join(SCALAR_PARAM_KEYS)}, got {key!r}", key=key)
    try:
        params = cfg.params.replace(**{key: value})
    except ValueError as exc:
        raise ConfigError(f"{key}={value!r}: {exc}", key=key) from None
    return replace(cfg, params=params)
