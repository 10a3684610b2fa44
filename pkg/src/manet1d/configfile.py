"""Plain-text run configuration files.

One `key = value` pair per line; blank lines and `#` comments are
ignored. Recognised keys: K, N, m, rates, p_l, p_r, boundary, phi,
seed, slots, burn_in, replications. Anything else is an error.
"""

from __future__ import annotations

from .errors import ConfigError
from .grid import Boundary, NetworkParams
from .simulate import SimConfig

_KEYS = {
    "K", "N", "m", "rates", "p_l", "p_r", "boundary", "phi",
    "seed", "slots", "burn_in", "replications",
}
_REQUIRED = {"K", "N", "p_l", "p_r", "phi"}

_BOUNDARIES = {
    "stuck": Boundary.STUCK,
    "stuckatboundary": Boundary.STUCK,
    "stuck_at_boundary": Boundary.STUCK,
    "wrap": Boundary.WRAP,
    "wraparound": Boundary.WRAP,
    "wrap_around": Boundary.WRAP,
}


def _parse_int(key: str, raw: str, lineno: int) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"line {lineno}: {key} must be an integer, got {raw!r}") from None


def _parse_float(key: str, raw: str, lineno: int) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"line {lineno}: {key} must be a number, got {raw!r}") from None


def _parse_rates(raw: str, lineno: int) -> tuple[float, ...]:
    cleaned = raw.strip().strip("[]")
    parts = [p for p in cleaned.replace(",", " ").split() if p]
    if not parts:
        raise ConfigError(f"line {lineno}: rates must list at least one value")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"line {lineno}: bad rates value {raw!r}") from None


def parse_config_text(text: str, source: str = "<config>") -> SimConfig:
    values: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source}: line {lineno}: expected 'key = value', got {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in _KEYS:
            raise ConfigError(f"{source}: line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}: line {lineno}: duplicate key {key!r}")
        try:
            if key in ("K", "N", "m", "seed", "slots", "burn_in", "replications"):
                values[key] = _parse_int(key, raw, lineno)
            elif key in ("p_l", "p_r", "phi"):
                values[key] = _parse_float(key, raw, lineno)
            elif key == "rates":
                values[key] = _parse_rates(raw, lineno)
            elif key == "boundary":
                b = _BOUNDARIES.get(raw.strip().lower())
                if b is None:
                    raise ConfigError(
                        f"line {lineno}: boundary must be 'stuck' or 'wrap', got {raw!r}"
                    )
                values[key] = b
        except ConfigError as e:
            raise ConfigError(f"{source}: {e}") from None

    missing = _REQUIRED - values.keys()
    if missing:
        raise ConfigError(f"{source}: missing required keys: {', '.join(sorted(missing))}")

    m = values.get("m", 2)
    rates = values.get("rates", (1.0, 0.5) if m == 2 else None)
    if rates is None:
        raise ConfigError(f"{source}: rates must be given when m != 2")
    try:
        params = NetworkParams(
            K=values["K"],
            N=values["N"],
            m=m,
            rates=rates,
            p_l=values["p_l"],
            p_r=values["p_r"],
            boundary=values.get("boundary", Boundary.STUCK),
            phi=values["phi"],
        )
        return SimConfig(
            params=params,
            slots=values.get("slots", 10**6),
            burn_in=values.get("burn_in", 10**4),
            seed=values.get("seed", 0),
            replications=values.get("replications", 5),
        )
    except (ValueError, ConfigError) as e:
        raise ConfigError(f"{source}: {e}") from None


def parse_config_file(path: str) -> SimConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read config file {path!r}: {e}") from None
    return parse_config_text(text, source=path)
