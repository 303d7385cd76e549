"""Synthetic labeled stream sets, stream perturbations, and stream file IO.

The default generator emits four classes of planar curves that share scale
and point statistics but differ in traversal order and enclosed area:
clockwise circles, counterclockwise circles, figure-eights, and straight
sweeps.  Sample lengths, sampling grids, and speed profiles are all
randomized per sample and reproducible from a single seed.

Stream files are JSON-lines text: an optional header object followed by
one self-describing record per sample.  Floats survive a save/load round
trip exactly (shortest-roundtrip decimal).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .lyndon import enumerate_lyndon
from .paths import TimedPath, log_signature, signature
from .neural import SkeletonSequence

__all__ = [
    "LabeledStreamSet",
    "StreamParseError",
    "DEFAULT_CLASSES",
    "gen_synthetic",
    "perturb_drop",
    "perturb_insert",
    "upsample_linear",
    "mape",
    "digit_polyline",
    "mape_drop_study",
    "save_streams",
    "load_streams",
]

DEFAULT_CLASSES = ("circle_cw", "circle_ccw", "figure_eight", "line_sweep")


@dataclass
class LabeledStreamSet:
    samples: list
    labels: np.ndarray
    class_names: tuple[str, ...] = DEFAULT_CLASSES
    seed: int | None = None

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.intp)
        if len(self.samples) != self.labels.size:
            raise ValueError("one label per sample is required")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= len(self.class_names)):
            raise ValueError("labels out of range")

    def __len__(self) -> int:
        return len(self.samples)

    def subset(self, indices) -> "LabeledStreamSet":
        indices = np.asarray(indices, dtype=np.intp)
        return LabeledStreamSet(
            [self.samples[i] for i in indices],
            self.labels[indices],
            self.class_names,
            self.seed,
        )


class StreamParseError(ValueError):
    """Malformed stream file; carries the offending record index."""


def _sorted_times(rng, n: int) -> np.ndarray:
    # irregular grid on [0, 1] with pinned endpoints and strictly positive gaps
    gaps = rng.uniform(0.2, 1.8, size=n - 1)
    t = np.concatenate([[0.0], np.cumsum(gaps)])
    return t / t[-1]


def _speed_profile(rng, n: int) -> np.ndarray:
    # monotone warp of [0, 1]: traversal speed varies along the curve
    inc = rng.gamma(2.0, 1.0, size=n - 1) + 1e-3
    s = np.concatenate([[0.0], np.cumsum(inc)])
    return s / s[-1]


def _class_curve(name: str, s: np.ndarray, rng) -> np.ndarray:
    if name == "circle_cw" or name == "circle_ccw":
        sign = -1.0 if name == "circle_cw" else 1.0
        phase = rng.uniform(0.0, 2.0 * math.pi)
        ang = phase + sign * 2.0 * math.pi * s
        return np.stack([np.cos(ang), np.sin(ang)], axis=1)
    if name == "figure_eight":
        phase = rng.uniform(0.0, 2.0 * math.pi)
        ang = phase + 2.0 * math.pi * s
        return np.stack([np.sin(ang), 0.5 * np.sin(2.0 * ang)], axis=1)
    if name == "line_sweep":
        ang = rng.uniform(0.0, 2.0 * math.pi)
        u = np.array([math.cos(ang), math.sin(ang)])
        return (2.0 * s - 1.0)[:, None] * u[None, :]
    raise ValueError(f"unknown class {name!r}")


def gen_synthetic(
    count: int,
    seed: int = 0,
    classes: tuple[str, ...] = DEFAULT_CLASSES,
    length_range: tuple[int, int] = (20, 120),
    noise: float = 0.02,
    layout: str = "path",
    joints: int = 5,
) -> LabeledStreamSet:
    """Labeled synthetic streams, deterministic under the seed.

    ``layout="path"`` yields 2-D :class:`TimedPath` samples; ``"skeleton"``
    yields :class:`SkeletonSequence` samples whose joints trace scaled and
    shifted copies of the class curve on a chain-graph skeleton.
    """
    if not classes:
        raise ValueError("need at least one class")
    rng = np.random.default_rng(seed)
    samples = []
    labels = np.empty(count, dtype=np.intp)
    adjacency = None
    if layout == "skeleton":
        adjacency = np.zeros((joints, joints))
        for j in range(joints - 1):
            adjacency[j, j + 1] = adjacency[j + 1, j] = 1.0
    for i in range(count):
        label = int(rng.integers(len(classes)))
        n = int(rng.integers(length_range[0], length_range[1] + 1))
        t = _sorted_times(rng, n)
        s = _speed_profile(rng, n)
        base = _class_curve(classes[label], s, rng)
        if layout == "path":
            points = base + rng.normal(0.0, noise, size=base.shape)
            samples.append(TimedPath(t, points))
        elif layout == "skeleton":
            scale = 0.5 + 0.15 * np.arange(joints)
            offset = rng.normal(0.0, 0.3, size=(joints, 2))
            frames = base[:, None, :] * scale[None, :, None] + offset[None, :, :]
            frames = frames + rng.normal(0.0, noise, size=frames.shape)
            samples.append(SkeletonSequence(t, frames, adjacency))
        else:
            raise ValueError(f"unknown layout {layout!r}")
        labels[i] = label
    return LabeledStreamSet(samples, labels, tuple(classes), seed)


def _drop_indices(path: TimedPath, k: int, rng) -> TimedPath:
    n = path.num_samples
    k = min(k, max(n - 2, 0))
    if k == 0:
        return path
    drop = rng.choice(np.arange(1, n - 1), size=k, replace=False)
    keep = np.setdiff1d(np.arange(n), drop)
    return TimedPath(path.times[keep], path.points[keep])


def perturb_drop(path: TimedPath, rate: float, seed) -> TimedPath:
    """Discard floor(rate * n) interior samples uniformly; endpoints survive.

    Timestamps of the surviving samples are unchanged.
    """
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"drop rate must be in [0, 1), got {rate}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    k = int(math.floor(rate * path.num_samples + 1e-9))
    return _drop_indices(path, k, rng)


def perturb_insert(path: TimedPath, rate: float, seed) -> TimedPath:
    """Duplicate floor(rate * n) frames in place.

    Each duplicate repeats the chosen point with a timestamp midway to the
    next sample, keeping the grid strictly increasing.  The traversed curve
    is unchanged, so whole-path log-signatures are exactly preserved.
    """
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"insert rate must be in [0, 1), got {rate}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    n = path.num_samples
    k = int(math.floor(rate * n + 1e-9))
    k = min(k, n - 1)
    if k == 0 or n < 2:
        return path
    chosen = np.sort(rng.choice(np.arange(n - 1), size=k, replace=False))[::-1]
    times = list(path.times)
    points = list(path.points)
    for i in chosen:
        times.insert(i + 1, 0.5 * (times[i] + times[i + 1]))
        points.insert(i + 1, points[i])
    return TimedPath(np.array(times), np.stack(points))


def upsample_linear(path: TimedPath, factor: int) -> TimedPath:
    """Insert factor-1 equally spaced interpolated samples per segment."""
    if factor < 1:
        raise ValueError(f"upsample factor must be >= 1, got {factor}")
    if factor == 1 or path.num_samples < 2:
        return path
    t, p = path.times, path.points
    frac = np.arange(factor) / factor
    times = (t[:-1, None] + np.diff(t)[:, None] * frac[None, :]).reshape(-1)
    pts = (p[:-1, None, :] + np.diff(p, axis=0)[:, None, :] * frac[None, :, None])
    pts = pts.reshape(-1, p.shape[1])
    return TimedPath(np.append(times, t[-1]), np.vstack([pts, p[-1]]))


def mape(a, b, guard: float = 1e-8) -> float:
    """Mean absolute percentage error of b against reference a.

    Asymmetric in its arguments: the first argument is the reference whose
    magnitudes normalize each component.
    """
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if a.size != b.size:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    return float(np.mean(np.abs(a - b) / np.maximum(np.abs(a), guard)))


def digit_polyline(n: int = 53) -> TimedPath:
    """Pen-trajectory-like planar polyline: a loop plus a descending tail.

    Deterministic; used as the reference curve of the missing-data study.
    """
    s = np.linspace(0.0, 1.0, n)
    loop = s <= 0.65
    u = s[loop] / 0.65
    ang = 0.5 * math.pi + 2.0 * math.pi * u
    x_loop = 0.5 * np.cos(ang)
    y_loop = 0.55 + 0.45 * np.sin(ang)
    v = (s[~loop] - 0.65) / 0.35
    x_tail = x_loop[-1] + 0.25 * np.sin(1.5 * math.pi * v) * (1 - v)
    y_tail = y_loop[-1] - 1.1 * v
    points = np.stack(
        [np.concatenate([x_loop, x_tail]), np.concatenate([y_loop, y_tail])], axis=1
    )
    return TimedPath(s, points)


def mape_drop_study(
    path: TimedPath | None = None,
    degree: int = 3,
    trials: int = 1000,
    max_drop: int = 16,
    seed: int = 0,
) -> dict:
    """Feature error under random sample dropping.

    Each trial drops a uniform 1..max_drop interior samples and measures the
    MAPE of the truncated log-signature and of the signature (degree-0 term
    excluded) against the unperturbed features.
    """
    if path is None:
        path = digit_polyline()
    rng = np.random.default_rng(seed)
    basis = enumerate_lyndon(path.width, degree)
    ref_logsig = log_signature(path, degree, basis)
    ref_sig = signature(path, degree).ravel()[1:]
    logsig_errors = np.empty(trials)
    sig_errors = np.empty(trials)
    for trial in range(trials):
        k = int(rng.integers(1, max_drop + 1))
        dropped = _drop_indices(path, k, rng)
        logsig_errors[trial] = mape(ref_logsig, log_signature(dropped, degree, basis))
        sig_errors[trial] = mape(ref_sig, signature(dropped, degree).ravel()[1:])
    return {
        "degree": degree,
        "trials": trials,
        "max_drop": max_drop,
        "mean_logsig_mape": float(logsig_errors.mean()),
        "mean_sig_mape": float(sig_errors.mean()),
        "logsig_mape": logsig_errors,
        "sig_mape": sig_errors,
    }


# ---------------------------------------------------------------------------
# stream files


def _record_for(sample, label: int) -> dict:
    if isinstance(sample, TimedPath):
        return {
            "kind": "path",
            "label": int(label),
            "n": sample.num_samples,
            "d": sample.width,
            "times": sample.times.tolist(),
            "points": sample.points.tolist(),
        }
    record = {
        "kind": "skeleton",
        "label": int(label),
        "n": sample.num_frames,
        "joints": sample.num_joints,
        "coords": sample.num_coords,
        "times": sample.times.tolist(),
        "frames": sample.frames.tolist(),
    }
    if sample.adjacency is not None:
        record["adjacency"] = sample.adjacency.tolist()
    return record


def save_streams(dataset: LabeledStreamSet, target) -> None:
    """Write a stream set as JSON lines (header object first)."""
    own = isinstance(target, (str, bytes)) or hasattr(target, "__fspath__")
    handle = open(target, "w") if own else target
    try:
        header = {
            "kind": "header",
            "classes": list(dataset.class_names),
            "seed": dataset.seed,
        }
        handle.write(json.dumps(header) + "\n")
        for sample, label in zip(dataset.samples, dataset.labels):
            handle.write(json.dumps(_record_for(sample, label)) + "\n")
    finally:
        if own:
            handle.close()


def _parse_record(obj: dict, where: str):
    kind = obj.get("kind")
    try:
        if kind == "path":
            times = np.asarray(obj["times"], dtype=np.float64)
            points = np.asarray(obj["points"], dtype=np.float64)
            if times.size != obj["n"] or points.shape != (obj["n"], obj["d"]):
                raise ValueError("declared n/d do not match the data")
            return TimedPath(times, points), int(obj["label"])
        if kind == "skeleton":
            times = np.asarray(obj["times"], dtype=np.float64)
            frames = np.asarray(obj["frames"], dtype=np.float64)
            if times.size != obj["n"] or frames.shape != (obj["n"], obj["joints"], obj["coords"]):
                raise ValueError("declared n/joints/coords do not match the data")
            adjacency = obj.get("adjacency")
            if adjacency is not None:
                adjacency = np.asarray(adjacency, dtype=np.float64)
            return SkeletonSequence(times, frames, adjacency), int(obj["label"])
        raise ValueError(f"unknown record kind {kind!r}")
    except (KeyError, TypeError) as exc:
        raise StreamParseError(f"{where}: missing or malformed field ({exc})") from exc
    except ValueError as exc:
        raise StreamParseError(f"{where}: {exc}") from exc


def load_streams(source) -> LabeledStreamSet:
    """Read a stream set written by :func:`save_streams`.

    An empty file yields an empty set.  Malformed records raise
    :class:`StreamParseError` with the offending line number.
    """
    own = isinstance(source, (str, bytes)) or hasattr(source, "__fspath__")
    handle = open(source, "r") if own else source
    try:
        samples = []
        labels = []
        classes: tuple[str, ...] = ()
        seed = None
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            where = f"line {lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise StreamParseError(f"{where}: invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise StreamParseError(f"{where}: expected a JSON object")
            if obj.get("kind") == "header":
                classes = tuple(obj.get("classes") or ())
                seed = obj.get("seed")
                continue
            sample, label = _parse_record(obj, where)
            samples.append(sample)
            labels.append(label)
    finally:
        if own:
            handle.close()
    if not classes:
        top = (max(labels) + 1) if labels else 0
        classes = tuple(f"class_{i}" for i in range(top))
    return LabeledStreamSet(samples, np.asarray(labels, dtype=np.intp), classes, seed)
