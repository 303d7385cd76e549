"""Piecewise-linear paths and their truncated (log-)signatures.

A :class:`TimedPath` is a strictly increasing timestamp grid plus one
d-dimensional point per timestamp, always interpreted as its continuous
piecewise-linear interpolant.  Signatures are computed by folding the
closed-form exponential of each linear segment with the graded tensor
product, so they depend on the visiting order of the points but never on
the timestamps themselves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lyndon import LyndonBasis, enumerate_lyndon, project_to_basis
from .tensor_algebra import TruncatedTensor, exp_level_one, tensor_log, tensor_mul

__all__ = [
    "TimedPath",
    "signature",
    "log_signature",
    "restrict",
    "reparameterize",
    "insert_sample_times",
    "reverse_path",
    "evaluate",
]


@dataclass(frozen=True)
class TimedPath:
    """Timestamped point sequence, read as a piecewise-linear path."""

    times: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.float64).reshape(-1)
        points = np.asarray(self.points, dtype=np.float64)
        if points.ndim == 1:
            points = points[:, None]
        if points.ndim != 2 or points.shape[0] != times.size:
            raise ValueError(
                f"points must be (n, d) with one row per timestamp, got {points.shape}"
            )
        if times.size < 1:
            raise ValueError("a path needs at least one sample")
        if not np.all(np.isfinite(times)) or not np.all(np.isfinite(points)):
            raise ValueError("timestamps and points must be finite")
        if times.size > 1 and not np.all(np.diff(times) > 0):
            raise ValueError("timestamps must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "points", points)

    @property
    def num_samples(self) -> int:
        return self.times.size

    @property
    def width(self) -> int:
        return self.points.shape[1]

    @property
    def span(self) -> tuple[float, float]:
        return float(self.times[0]), float(self.times[-1])


def evaluate(path: TimedPath, at: np.ndarray | float) -> np.ndarray:
    """Values of the piecewise-linear interpolant at the given times."""
    at = np.atleast_1d(np.asarray(at, dtype=np.float64))
    t, p = path.times, path.points
    if np.any(at < t[0]) or np.any(at > t[-1]):
        raise ValueError("evaluation times outside the path's time span")
    if path.num_samples == 1:
        return np.broadcast_to(p[0], (at.size, path.width)).copy()
    idx = np.clip(np.searchsorted(t, at, side="right") - 1, 0, t.size - 2)
    w = (at - t[idx]) / (t[idx + 1] - t[idx])
    return (1.0 - w)[:, None] * p[idx] + w[:, None] * p[idx + 1]


def signature(path: TimedPath, degree: int) -> TruncatedTensor:
    """Truncated signature of the path, via the segment-exponential fold."""
    if degree < 1:
        raise ValueError(f"degree must be at least 1, got {degree}")
    out = TruncatedTensor.unit(path.width, degree)
    if path.num_samples < 2:
        return out
    for increment in np.diff(path.points, axis=0):
        if not increment.any():
            continue
        out = tensor_mul(out, exp_level_one(increment, degree))
    return out


def log_signature(
    path: TimedPath, degree: int, basis: LyndonBasis | None = None
) -> np.ndarray:
    """Lyndon-basis coordinates of the truncated log-signature."""
    if basis is None:
        basis = enumerate_lyndon(path.width, degree)
    if path.num_samples < 2:
        return np.zeros(basis.dim)
    return project_to_basis(tensor_log(signature(path, degree)), basis)


def restrict(path: TimedPath, start: float, stop: float) -> TimedPath:
    """Sub-path over [start, stop], interpolating the boundary points as needed."""
    t = path.times
    if not (t[0] <= start < stop <= t[-1]):
        raise ValueError(
            f"restriction interval [{start}, {stop}] outside time span [{t[0]}, {t[-1]}]"
        )
    lo = int(np.searchsorted(t, start, side="left"))
    hi = int(np.searchsorted(t, stop, side="right")) - 1
    times = [np.array([start])] if t[lo] > start else []
    pieces = [evaluate(path, start)] if t[lo] > start else []
    times.append(t[lo : hi + 1])
    pieces.append(path.points[lo : hi + 1])
    if t[hi] < stop:
        times.append(np.array([stop]))
        pieces.append(evaluate(path, stop))
    return TimedPath(np.concatenate(times), np.concatenate(pieces, axis=0))


def reparameterize(path: TimedPath, new_times) -> TimedPath:
    """Same points on a new strictly increasing time grid.

    The (log-)signature is unchanged: it never reads the timestamps.
    """
    new_times = np.asarray(new_times, dtype=np.float64).reshape(-1)
    if new_times.size != path.num_samples:
        raise ValueError("new time grid must match the number of samples")
    if new_times.size > 1 and not np.all(np.diff(new_times) > 0):
        raise ValueError("time reparameterization must be strictly increasing")
    return TimedPath(new_times, path.points)


def insert_sample_times(path: TimedPath, extra_times) -> TimedPath:
    """Insert interpolated samples at the given times (collinear refinement).

    Times already on the grid are ignored.  The interpolant, and hence the
    (log-)signature, is unchanged.
    """
    extra = np.asarray(extra_times, dtype=np.float64).reshape(-1)
    lo, hi = path.span
    if extra.size and (extra.min() < lo or extra.max() > hi):
        raise ValueError("inserted times must lie inside the path's time span")
    extra = np.setdiff1d(extra, path.times)
    if extra.size == 0:
        return path
    times = np.concatenate([path.times, extra])
    order = np.argsort(times, kind="stable")
    times = times[order]
    points = np.concatenate([path.points, evaluate(path, extra)], axis=0)[order]
    return TimedPath(times, points)


def reverse_path(path: TimedPath) -> TimedPath:
    """Traverse the same points backwards on a forward-running clock."""
    t = path.times
    return TimedPath(t[0] + t[-1] - t[::-1], path.points[::-1].copy())
