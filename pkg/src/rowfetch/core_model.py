"""Closed-form arithmetic for batched row transport.

A driver that pulls N records in batches of f needs ceil(N/f) round
trips.  Total transport time decomposes into a per-trip constant, a
batch-size term, and a residual-trip correction:

    T(f) = k1 * floor(N/f) + k2 * f + k3 * [N mod f > 0] + k4 * (N mod f)

Dropping everything but the trip term and letting the trip count vary
continuously gives the reciprocal approximation T(f) = k1 * N / f, a
rectangular hyperbola in f.  Both forms, the discrete trip-count slope,
and curve sweeps live here.  Nothing in this module simulates anything
or touches I/O.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable


@dataclass(frozen=True)
class WorkloadSpec:
    """A query result set: how many records, and how wide each one is."""

    total_records: int
    field_byte_sizes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "field_byte_sizes", tuple(self.field_byte_sizes))
        if self.total_records < 0:
            raise ValueError("total_records must be >= 0")
        if any(b < 1 for b in self.field_byte_sizes):
            raise ValueError("every field byte size must be >= 1")

    @property
    def record_bytes(self) -> int:
        return sum(self.field_byte_sizes)


@dataclass(frozen=True)
class FetchPlan:
    """A prefetch size applied to a result set of known cardinality."""

    prefetch_size: int
    total_records: int

    def __post_init__(self):
        # f = 0 would mean the driver never moves a row; the model has a
        # pole there, so it is rejected at construction.
        if self.prefetch_size < 1:
            raise ValueError("prefetch_size must be >= 1")
        if self.total_records < 0:
            raise ValueError("total_records must be >= 0")


@dataclass(frozen=True)
class CostConstants:
    """The four fitted constants of the transport model, in ms.

    avg_trip_time is a single illustrative per-trip number used only for
    slope tables; it is not an input to the cost formulas.
    """

    k1: float
    k2: float
    k3: float
    k4: float
    avg_trip_time: float = 400.0

    def __post_init__(self):
        if min(self.k1, self.k2, self.k3, self.k4) < 0:
            raise ValueError("cost constants must be >= 0")
        if self.avg_trip_time <= 0:
            raise ValueError("avg_trip_time must be > 0")


@dataclass(frozen=True)
class CurvePoint:
    prefetch_size: int
    elapsed: float


@dataclass(frozen=True)
class SlopeRow:
    """One row of a trip-decrease table: what raising f by one buys."""

    prefetch_size: int
    trips: int
    trips_after_increment: int
    trip_decrease: int
    slope_ms: float


def round_trips(n: int, f: int) -> int:
    """Round trips needed to move n records in batches of f (= ceil(n/f))."""
    if f < 1:
        raise ValueError("prefetch size must be >= 1")
    if n < 0:
        raise ValueError("record count must be >= 0")
    return n // f + (1 if n % f else 0)


def quantized_cost(plan: FetchPlan, k: CostConstants) -> float:
    """Transport time (ms) with trips held at integer granularity.

    Full batches are charged k1 each; k2 * f is a single global term, not
    a per-trip one.  The residual constants k3 and k4 contribute only
    when a short final trip exists.  An empty result set costs nothing.
    """
    n, f = plan.total_records, plan.prefetch_size
    if n == 0:
        return 0.0
    residual = n % f
    cost = k.k1 * (n // f) + k.k2 * f
    if residual:
        cost += k.k3 + k.k4 * residual
    return cost


def reciprocal_cost(n: int, f: int, k1: float) -> float:
    """Transport time (ms) on the continuous hyperbola k1 * n / f."""
    if f < 1:
        raise ValueError("prefetch size must be >= 1")
    if n < 0:
        raise ValueError("record count must be >= 0")
    return k1 * n / f


def trip_decrease_per_unit_f(n: int, f: int) -> int:
    """How many round trips a one-record bump of the prefetch size saves."""
    return round_trips(n, f) - round_trips(n, f + 1)


def slope_table(n: int, f_values: Iterable[int], avg_trip_time_ms: float) -> list[SlopeRow]:
    """Tabulate the trip decrease and its time value at selected sizes.

    slope_ms prices each saved trip at one flat avg_trip_time_ms value;
    it is an illustration aid, not a fitted quantity.
    """
    rows = []
    for f in f_values:
        before = round_trips(n, f)
        after = round_trips(n, f + 1)
        rows.append(SlopeRow(f, before, after, before - after, (before - after) * avg_trip_time_ms))
    return rows


def sweep_curve(
    n: int,
    f_lo: int,
    f_hi: int,
    k: CostConstants,
    mode: str = "quantized",
) -> list[CurvePoint]:
    """Evaluate the cost model over an inclusive range of prefetch sizes.

    mode "quantized" uses the four-constant form; "reciprocal" uses the
    k1 * n / f hyperbola.  An empty range yields an empty list.
    """
    if f_lo < 1:
        raise ValueError("range lower bound must be >= 1")
    if mode not in ("quantized", "reciprocal"):
        raise ValueError(f"unknown sweep mode: {mode!r}")
    points = []
    for f in range(f_lo, f_hi + 1):
        if mode == "quantized":
            elapsed = quantized_cost(FetchPlan(f, n), k)
        else:
            elapsed = reciprocal_cost(n, f, k.k1)
        points.append(CurvePoint(f, elapsed))
    return points


def curve_tsv(points: Iterable[CurvePoint]) -> str:
    """Serialize curve points as two-column TSV for external plotting."""
    return "".join(f"{p.prefetch_size}\t{p.elapsed!r}\n" for p in points)
