"""Infer the prefetch size actually in force from a per-row latency trace.

A batched driver serves most rows out of its client cache in about zero
time; the first row of every new batch blocks on a full round trip.
Against the row number those rows stand out as periodic peaks, and the
spacing between peaks is the batch size the driver really used, whatever
the application asked for.

No standard quantitative definition of "peak" exists for such traces,
so the threshold rule here is this module's own invention:

* Rows are peaks when they exceed max(median_ratio * median, mean +
  sigma_k * stdev) over the whole trace (defaults 10 and 3).  The median
  guard keeps tail noise in peak-less traces from being flagged.
* Simulated traces show cache hits as exactly 0 ms.  When such rows make
  up more than half the trace the order statistics above degenerate, so
  the zero rows are treated as the floor and every strictly positive row
  counts as a peak.
* A trace whose values are all equal has no peaks by definition.

Both knobs are exposed (and overridable from the command line), and the
rule is scale-invariant: rescaling a trace by any positive factor leaves
the detected rows unchanged.
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass, replace
from statistics import mean, median, pstdev
from typing import Iterable, Sequence

Sample = tuple[int, float]


class TraceFormatError(ValueError):
    """A trace CSV that does not follow the row_index,elapsed_ms format."""


@dataclass(frozen=True)
class PeakReport:
    """What a latency trace reveals about the driver's batching."""

    peak_rows: tuple[int, ...]
    inferred_prefetch: int | None
    inter_peak_gaps: tuple[int, ...]
    avg_trip_time: float | None
    confidence: float


def detect_peaks(
    samples: Sequence[Sample],
    *,
    median_ratio: float = 10.0,
    sigma_k: float = 3.0,
) -> list[int]:
    """Return the row indices whose elapsed time stands out as a peak."""
    if not samples:
        raise ValueError("cannot detect peaks in an empty trace")
    values = [ms for _, ms in samples]
    if max(values) == min(values):
        return []
    zeros = sum(1 for v in values if v == 0.0)
    if zeros > len(values) / 2:
        # Degenerate statistics: the cache-hit floor dominates, so any
        # row that cost anything at all belongs to a trip.
        return [row for row, ms in samples if ms > 0.0]
    threshold = max(median_ratio * median(values), mean(values) + sigma_k * pstdev(values))
    return [row for row, ms in samples if ms > threshold]


def infer_effective_prefetch(peaks: Sequence[int], first_row: int = 1) -> PeakReport:
    """Estimate the batch size from peak spacing.

    The estimate is the modal inter-peak gap, ties broken toward the
    smallest candidate (understating f overstates trips, the safer
    error).  Confidence is the fraction of evidence agreeing with the
    mode, where the evidence is every gap plus the offset of the first
    peak from first_row (a batch's first blocking row sits one batch
    past the start, so that offset should equal the gap).
    """
    rows = sorted(peaks)
    gaps = tuple(b - a for a, b in zip(rows, rows[1:]))
    if len(rows) < 2:
        return PeakReport(tuple(rows), None, gaps, None, 0.0)
    counts = Counter(gaps)
    top = max(counts.values())
    modal = min(g for g, c in counts.items() if c == top)
    evidence = list(gaps) + [rows[0] - first_row]
    confidence = sum(1 for g in evidence if g == modal) / len(evidence)
    return PeakReport(tuple(rows), modal, gaps, None, confidence)


def avg_trip_time_from_trace(samples: Sequence[Sample], peaks: Iterable[int]) -> float | None:
    """Mean elapsed over the peak rows, or None when there are none."""
    wanted = set(peaks)
    values = [ms for row, ms in samples if row in wanted]
    if not values:
        return None
    return mean(values)


def analyze_trace(
    samples: Sequence[Sample],
    *,
    median_ratio: float = 10.0,
    sigma_k: float = 3.0,
    first_row: int = 1,
) -> PeakReport:
    """Full pipeline: detect peaks, infer the prefetch size, average them."""
    peaks = detect_peaks(samples, median_ratio=median_ratio, sigma_k=sigma_k)
    report = infer_effective_prefetch(peaks, first_row)
    return replace(report, avg_trip_time=avg_trip_time_from_trace(samples, peaks))


def read_trace_samples(path) -> list[Sample]:
    """Load a row_index,elapsed_ms CSV, validating the header."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["row_index", "elapsed_ms"]:
            raise TraceFormatError(f"{path}: expected header row_index,elapsed_ms")
        samples = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                samples.append((int(row[0]), float(row[1])))
            except (IndexError, ValueError) as exc:
                raise TraceFormatError(f"{path}:{lineno}: bad sample row: {row!r}") from exc
    return samples
