"""Flat dotted-key run configuration for the command-line tools.

One `key=value` pair per line, `#` comments, no sections, no nesting, so
configs diff cleanly.  Per-hop network values accept either a single
number (applied to every hop) or a comma list with one entry per hop.

    workload.total_records=502
    workload.field_bytes=50,4000,8,16
    network.hops=2
    network.bandwidth_bytes_per_ms=600
    network.base_latency_ms=150
    network.availability=0.9
    server.cache_records=100
    driver.default_prefetch=10
    run.seed=7
    run.jitter=0

Bundled scenario presets live next to this module and can be named on
the command line anywhere a config path is accepted.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .core_model import WorkloadSpec
from .fetch_sim import DriverSpec, HopSpec, NetworkSpec, ServerSpec


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


@dataclass(frozen=True)
class RunConfig:
    workload: WorkloadSpec
    network: NetworkSpec
    server: ServerSpec
    driver: DriverSpec
    seed: int
    jitter: float


_KNOWN_KEYS = {
    "workload.total_records",
    "workload.field_bytes",
    "network.hops",
    "network.bandwidth_bytes_per_ms",
    "network.base_latency_ms",
    "network.availability",
    "server.hard_parse_ms",
    "server.soft_parse_ms",
    "server.per_record_search_ms",
    "server.cache_records",
    "server.disk_access_ms",
    "driver.recommended_prefetch",
    "driver.enforced_prefetch",
    "driver.default_prefetch",
    "driver.per_field_conversion_ms",
    "driver.request_overhead_ms",
    "run.seed",
    "run.jitter",
}
_REQUIRED_KEYS = ("workload.total_records", "workload.field_bytes", "network.hops")


def _parse_pairs(text: str) -> dict[str, str]:
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        key, value = key.strip(), value.strip()
        if key not in _KNOWN_KEYS:
            raise ConfigError(key, "unknown config key")
        if key in pairs:
            raise ConfigError(key, "duplicate key")
        pairs[key] = value
    return pairs


def _get_int(pairs, key, default=None):
    if key not in pairs:
        return default
    try:
        return int(pairs[key])
    except ValueError:
        raise ConfigError(key, f"expected an integer, got {pairs[key]!r}") from None


def _get_float(pairs, key, default=None):
    if key not in pairs:
        return default
    try:
        return float(pairs[key])
    except ValueError:
        raise ConfigError(key, f"expected a number, got {pairs[key]!r}") from None


def _get_int_list(pairs, key):
    try:
        return [int(part) for part in pairs[key].split(",")]
    except ValueError:
        raise ConfigError(key, f"expected comma-separated integers, got {pairs[key]!r}") from None


def _per_hop(pairs, key, hops: int, default=None) -> list[float]:
    if key not in pairs:
        if default is None:
            raise ConfigError(key, f"required when network.hops={hops}")
        return [default] * hops
    try:
        values = [float(part) for part in pairs[key].split(",")]
    except ValueError:
        raise ConfigError(key, f"expected a number or comma list, got {pairs[key]!r}") from None
    if len(values) == 1:
        return values * hops
    if len(values) != hops:
        raise ConfigError(key, f"expected 1 or {hops} values, got {len(values)}")
    return values


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    pairs = _parse_pairs(text)
    for key in _REQUIRED_KEYS:
        if key not in pairs:
            raise ConfigError(key, "required key missing")

    try:
        workload = WorkloadSpec(_get_int(pairs, "workload.total_records"),
                                tuple(_get_int_list(pairs, "workload.field_bytes")))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("workload.field_bytes", str(exc)) from None

    hops = _get_int(pairs, "network.hops")
    if hops < 0:
        raise ConfigError("network.hops", "must be >= 0")
    if hops == 0:
        network = NetworkSpec(())
    else:
        bandwidth = _per_hop(pairs, "network.bandwidth_bytes_per_ms", hops)
        latency = _per_hop(pairs, "network.base_latency_ms", hops)
        availability = _per_hop(pairs, "network.availability", hops, default=1.0)
        try:
            network = NetworkSpec(tuple(HopSpec(b, l, a)
                                        for b, l, a in zip(bandwidth, latency, availability)))
        except ValueError as exc:
            raise ConfigError("network.*", str(exc)) from None

    try:
        server = ServerSpec(
            hard_parse=_get_float(pairs, "server.hard_parse_ms", 0.0),
            soft_parse=_get_float(pairs, "server.soft_parse_ms", 0.0),
            per_record_search=_get_float(pairs, "server.per_record_search_ms", 0.0),
            server_cache_size=_get_int(pairs, "server.cache_records", 100),
            disk_access_per_refill=_get_float(pairs, "server.disk_access_ms", 0.0),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("server.*", str(exc)) from None

    try:
        driver = DriverSpec(
            recommended_prefetch=_get_int(pairs, "driver.recommended_prefetch"),
            enforced_prefetch=_get_int(pairs, "driver.enforced_prefetch"),
            default_prefetch=_get_int(pairs, "driver.default_prefetch", 10),
            per_field_conversion=_get_float(pairs, "driver.per_field_conversion_ms", 0.0),
            request_overhead=_get_float(pairs, "driver.request_overhead_ms", 0.0),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("driver.*", str(exc)) from None

    jitter = _get_float(pairs, "run.jitter", 0.0)
    if jitter < 0 or jitter > 1:
        raise ConfigError("run.jitter", "must be in [0, 1]")
    seed = _get_int(pairs, "run.seed")
    if seed is None:
        if jitter > 0:
            raise ConfigError("run.seed", "required when run.jitter > 0")
        seed = 0
    return RunConfig(workload, network, server, driver, seed, jitter)


def list_presets() -> list[str]:
    root = resources.files("rowfetch") / "presets"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".cfg"))


def resolve_config_path(name_or_path: str) -> Path:
    """Accept a filesystem path or the bare name of a bundled preset."""
    path = Path(name_or_path)
    if path.exists():
        return path
    candidate = resources.files("rowfetch") / "presets" / name_or_path
    if candidate.is_file():
        return Path(str(candidate))
    raise FileNotFoundError(
        f"no such config file or preset: {name_or_path} "
        f"(presets: {', '.join(list_presets())})")


def load_config(name_or_path: str) -> RunConfig:
    path = resolve_config_path(name_or_path)
    return parse_config(path.read_text(), source=str(path))
