"""Least-squares recovery of the transport cost constants.

Given total elapsed times measured at several prefetch sizes over one
result set of N records, the four-constant model is linear in the basis

    [floor(N/f),  f,  1 if N mod f > 0 else 0,  N mod f]

so ordinary least squares recovers (k1..k4).  Physical constants cannot
be negative: any coefficient the unconstrained solve drives below zero
is pinned at zero and the remaining columns are re-solved (a small
active-set pass, at most one drop per coefficient).

Identifiability caveats handled here rather than silently mis-reported:

* fewer than four samples or four distinct sizes cannot determine four
  constants -> error;
* samples taken at different N mix incompatible curves -> error;
* when every sample has N mod f == 0 the residual columns are all zero,
  so k3/k4 are unidentifiable (reported as such, not as zero);
* any other exact collinearity among the basis columns -> error naming
  the columns involved.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass

import numpy as np

from .core_model import CostConstants

BASIS_NAMES = ("full_trips", "prefetch_size", "residual_trip", "residual_records")
CONDITION_WARN_AT = 1e8


class SampleFormatError(ValueError):
    """A samples file that does not follow the f,elapsed_ms format."""


class FitError(ValueError):
    """Sample sets the model cannot be fitted to."""


@dataclass(frozen=True)
class FitSample:
    """One measured point: total elapsed at a prefetch size, given N."""

    prefetch_size: int
    total_elapsed: float
    total_records: int

    def __post_init__(self):
        if self.prefetch_size < 1:
            raise ValueError("prefetch_size must be >= 1")
        if self.total_records < 0:
            raise ValueError("total_records must be >= 0")


@dataclass(frozen=True)
class FitResult:
    constants: CostConstants
    residual_rms: float
    sample_count: int
    condition_warning: bool
    warnings: tuple[str, ...] = ()
    unidentifiable: tuple[str, ...] = ()


def _basis_row(n: int, f: int) -> list[float]:
    residual = n % f
    return [float(n // f), float(f), 1.0 if residual else 0.0, float(residual)]


def _collinear_columns(design: np.ndarray, names: list[str]) -> list[str]:
    kept: list[int] = []
    guilty = []
    for col in range(design.shape[1]):
        candidate = design[:, kept + [col]]
        if np.linalg.matrix_rank(candidate) == len(kept) + 1:
            kept.append(col)
        else:
            guilty.append(names[col])
    return guilty


def _solve_nonnegative(design: np.ndarray, y: np.ndarray) -> np.ndarray:
    """OLS with negative coefficients pinned at zero, one drop at a time."""
    active = list(range(design.shape[1]))
    while active:
        sol, *_ = np.linalg.lstsq(design[:, active], y, rcond=None)
        if (sol >= -1e-12).all():
            coef = np.zeros(design.shape[1])
            coef[active] = np.clip(sol, 0.0, None)
            return coef
        del active[int(np.argmin(sol))]
    return np.zeros(design.shape[1])


def fit_cost_model(samples: list[FitSample]) -> FitResult:
    """Fit (k1..k4) to elapsed-vs-prefetch measurements of one result set."""
    if len(samples) < 4:
        raise FitError(f"need at least 4 samples, got {len(samples)}")
    if len({s.prefetch_size for s in samples}) < 4:
        raise FitError("need at least 4 distinct prefetch sizes")
    n_values = {s.total_records for s in samples}
    if len(n_values) != 1:
        raise FitError(f"samples mix result-set sizes {sorted(n_values)}; fit one N at a time")
    n = n_values.pop()

    design = np.array([_basis_row(n, s.prefetch_size) for s in samples])
    y = np.array([s.total_elapsed for s in samples])

    warnings: list[str] = []
    unidentifiable: tuple[str, ...] = ()
    names = list(BASIS_NAMES)
    if not design[:, 3].any():
        # Every sample divides N evenly: the residual columns carry no
        # information, so only k1/k2 can be estimated.
        unidentifiable = ("k3", "k4")
        warnings.append("k3/k4 unidentifiable: every sample has N mod f == 0")
        design = design[:, :2]
        names = names[:2]

    if np.linalg.matrix_rank(design) < design.shape[1]:
        guilty = _collinear_columns(design, names)
        raise FitError("design matrix is rank-deficient; collinear columns: "
                       + ", ".join(guilty))

    condition = float(np.linalg.cond(design))
    condition_warning = condition > CONDITION_WARN_AT
    if condition_warning:
        warnings.append(f"ill-conditioned design matrix (condition {condition:.3g})")

    coef = _solve_nonnegative(design, y)
    residual_rms = float(np.sqrt(np.mean((design @ coef - y) ** 2)))
    k = np.zeros(4)
    k[: len(coef)] = coef
    constants = CostConstants(k[0], k[1], k[2], k[3],
                              avg_trip_time=k[0] if k[0] > 0 else 1.0)
    return FitResult(constants, residual_rms, len(samples), condition_warning,
                     tuple(warnings), unidentifiable)


def fit_trip_cost_vs_hops(points: list[tuple[int, float]]) -> tuple[float, float]:
    """Fit k1 = slope * hops + intercept through (hop_count, k1) points."""
    if len({h for h, _ in points}) < 2:
        raise FitError("need k1 at two or more distinct hop counts")
    hops = np.array([h for h, _ in points], dtype=float)
    k1 = np.array([v for _, v in points], dtype=float)
    slope, intercept = np.polyfit(hops, k1, 1)
    return float(slope), float(intercept)


_N_COMMENT = re.compile(r"#\s*N\s*=\s*(\d+)\s*$")


def read_fit_samples(path) -> list[FitSample]:
    """Load an f,elapsed_ms CSV whose `# N=<count>` comment names the set size."""
    total_records = None
    rows: list[tuple[int, float]] = []
    saw_header = False
    with open(path, newline="") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                match = _N_COMMENT.match(line)
                if match:
                    total_records = int(match.group(1))
                continue
            if not saw_header:
                if [part.strip() for part in line.split(",")] != ["f", "elapsed_ms"]:
                    raise SampleFormatError(f"{path}:{lineno}: expected header f,elapsed_ms")
                saw_header = True
                continue
            parts = line.split(",")
            try:
                rows.append((int(parts[0]), float(parts[1])))
            except (IndexError, ValueError) as exc:
                raise SampleFormatError(f"{path}:{lineno}: bad sample row: {line!r}") from exc
    if total_records is None:
        raise SampleFormatError(f"{path}: missing `# N=<count>` comment line")
    if not saw_header:
        raise SampleFormatError(f"{path}: missing f,elapsed_ms header")
    return [FitSample(f, ms, total_records) for f, ms in rows]


def write_fit_samples(samples: list[FitSample], path) -> None:
    if len({s.total_records for s in samples}) != 1:
        raise ValueError("samples must share one total_records value")
    with open(path, "w", newline="") as fh:
        fh.write(f"# N={samples[0].total_records}\n")
        writer = csv.writer(fh)
        writer.writerow(("f", "elapsed_ms"))
        for s in samples:
            writer.writerow((s.prefetch_size, repr(s.total_elapsed)))


def result_json(fit: FitResult) -> str:
    """Serialize a FitResult as a flat JSON object."""
    k = fit.constants
    payload = {
        "k1": None if "k1" in fit.unidentifiable else k.k1,
        "k2": None if "k2" in fit.unidentifiable else k.k2,
        "k3": None if "k3" in fit.unidentifiable else k.k3,
        "k4": None if "k4" in fit.unidentifiable else k.k4,
        "residual_rms": fit.residual_rms,
        "sample_count": fit.sample_count,
        "condition_warning": fit.condition_warning,
        "warnings": list(fit.warnings),
    }
    return json.dumps(payload)
