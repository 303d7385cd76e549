"""Trainable sequence classifiers built around the log-signature layer.

Everything is plain float64 numpy with hand-derived reverse-mode gradients:
path transformation layers (pointwise embedding, accumulative, time
channel, per-frame graph convolution), vanilla/LSTM recurrent cells, and
the model variants that compose them.  The recurrent part always unrolls
over the fixed number of partition segments, never over the raw frame
count, so streams of any length share one parameter shape with no filler
frames anywhere.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .logsig_layer import SegmentPartition, backward_from_state, logsig_sequence_forward
from .lyndon import enumerate_lyndon, logsig_dim
from .paths import TimedPath, evaluate

__all__ = [
    "SkeletonSequence",
    "ModelConfig",
    "TrainSettings",
    "TrainResult",
    "StreamClassifier",
    "embedding_forward",
    "accumulative_layer",
    "time_incorporated_layer",
    "add_start_points",
    "normalized_adjacency",
    "gcn_forward",
    "rnn_forward",
    "logsig_rnn_forward",
    "gcn_logsig_rnn_forward",
    "softmax",
    "cross_entropy",
    "train",
    "evaluate_model",
    "input_spec",
]

VARIANTS = ("el-logsig-rnn", "gcn-logsig-rnn", "gcn-logsig-rnn-2", "frame-rnn")
CELLS = ("vanilla", "lstm")


@dataclass(frozen=True)
class SkeletonSequence:
    """Frame sequence of joint coordinates plus optional bone adjacency."""

    times: np.ndarray
    frames: np.ndarray
    adjacency: np.ndarray | None = None

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.float64).reshape(-1)
        frames = np.asarray(self.frames, dtype=np.float64)
        if frames.ndim != 3 or frames.shape[0] != times.size:
            raise ValueError(f"frames must be (n, joints, coords), got {frames.shape}")
        if times.size > 1 and not np.all(np.diff(times) > 0):
            raise ValueError("timestamps must be strictly increasing")
        if not np.all(np.isfinite(frames)):
            raise ValueError("frames must be finite")
        adjacency = self.adjacency
        if adjacency is not None:
            adjacency = np.asarray(adjacency, dtype=np.float64)
            F = frames.shape[1]
            if adjacency.shape != (F, F):
                raise ValueError("adjacency must be joints x joints")
            if not np.allclose(adjacency, adjacency.T):
                raise ValueError("adjacency must be symmetric")
            if np.any(np.diag(adjacency) != 0):
                raise ValueError("adjacency diagonal must be zero (self-loops are implicit)")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "adjacency", adjacency)

    @property
    def num_frames(self) -> int:
        return self.times.size

    @property
    def num_joints(self) -> int:
        return self.frames.shape[1]

    @property
    def num_coords(self) -> int:
        return self.frames.shape[2]


@dataclass
class ModelConfig:
    variant: str = "el-logsig-rnn"
    degree: int = 2
    num_segments: int = 4
    embed_channels: int = 6
    embed_dim: int = 8
    gcn_dim: int = 6
    num_segments2: int = 4
    hidden: int = 32
    cell: str = "lstm"
    num_classes: int = 4
    use_embedding: bool = True
    use_accumulative: bool = True
    use_time: bool = True
    use_start_points: bool = True
    # frame-rnn only: feed the interpolant on a fixed-size uniform time grid
    # (how frame-level models conventionally cope with variable-length input);
    # 0 keeps the raw frames.
    resample_frames: int = 0

    def validate(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}, expected one of {VARIANTS}")
        if self.cell not in CELLS:
            raise ValueError(f"unknown cell {self.cell!r}, expected one of {CELLS}")
        if self.degree < 1 or self.num_segments < 1 or self.num_classes < 2:
            raise ValueError("degree and num_segments must be >= 1, num_classes >= 2")
        if self.variant == "gcn-logsig-rnn-2" and self.num_segments2 < 1:
            raise ValueError("stacked variant needs num_segments2 >= 1")


@dataclass
class TrainSettings:
    learning_rate: float = 1e-2
    momentum: float = 0.9
    batch_size: int = 32
    epochs: int = 40
    seed: int = 0
    clip_norm: float | None = None


@dataclass
class TrainResult:
    config: ModelConfig
    params: dict
    trace: list = field(default_factory=list)

    @property
    def final(self) -> dict:
        return self.trace[-1] if self.trace else {}


# ---------------------------------------------------------------------------
# layers


def embedding_forward(frames, point_w, point_b, mix_w, mix_b) -> np.ndarray:
    """Pointwise per-joint linear map, then one joint-mixing linear map.

    The same two maps are applied at every frame, so the output at frame t
    depends only on the input at frame t.
    """
    n = frames.shape[0]
    hidden = frames @ point_w + point_b
    return hidden.reshape(n, -1) @ mix_w + mix_b


def _embedding_backward(frames, point_w, point_b, mix_w, grad):
    n, F, _ = frames.shape
    c1 = point_w.shape[1]
    flat = (frames @ point_w + point_b).reshape(n, F * c1)
    g_mix_w = flat.T @ grad
    g_mix_b = grad.sum(axis=0)
    g_hidden = (grad @ mix_w.T).reshape(n, F, c1)
    g_point_w = np.einsum("nfd,nfc->dc", frames, g_hidden)
    g_point_b = g_hidden.sum(axis=(0, 1))
    g_frames = g_hidden @ point_w.T
    return g_frames, g_point_w, g_point_b, g_mix_w, g_mix_b


def accumulative_layer(seq: np.ndarray) -> np.ndarray:
    """Running partial sums along the frame axis."""
    return np.cumsum(seq, axis=0)


def _accumulative_backward(grad: np.ndarray) -> np.ndarray:
    return np.cumsum(grad[::-1], axis=0)[::-1]


def time_incorporated_layer(seq: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Prepend the normalized time coordinate to every frame."""
    times = np.asarray(times, dtype=np.float64).reshape(-1)
    n = seq.shape[0]
    if n == 1 or times[-1] == times[0]:
        channel = np.zeros(n)
    else:
        channel = (times - times[0]) / (times[-1] - times[0])
    return np.concatenate([channel[:, None], seq], axis=1)


def add_start_points(rows: np.ndarray, path: TimedPath, boundaries: np.ndarray) -> np.ndarray:
    """Append the path value at each segment start to the matching row."""
    starts = evaluate(path, boundaries[:-1])
    if starts.shape[0] != rows.shape[0]:
        raise ValueError("one start point per row is required")
    return np.concatenate([rows, starts], axis=1)


def _start_points_backward(path: TimedPath, boundaries: np.ndarray, g_starts: np.ndarray) -> np.ndarray:
    t = path.times
    grad = np.zeros_like(path.points)
    if path.num_samples == 1:
        grad[0] = g_starts.sum(axis=0)
        return grad
    at = boundaries[:-1]
    idx = np.clip(np.searchsorted(t, at, side="right") - 1, 0, t.size - 2)
    w = (at - t[idx]) / (t[idx + 1] - t[idx])
    np.add.at(grad, idx, (1.0 - w)[:, None] * g_starts)
    np.add.at(grad, idx + 1, w[:, None] * g_starts)
    return grad


def normalized_adjacency(adjacency: np.ndarray) -> np.ndarray:
    """Symmetric degree normalization of adjacency-plus-self-loops."""
    s = adjacency + np.eye(adjacency.shape[0])
    inv_sqrt = 1.0 / np.sqrt(s.sum(axis=1))
    return s * inv_sqrt[:, None] * inv_sqrt[None, :]


def gcn_forward(frames: np.ndarray, adjacency: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Per-frame graph convolution: mix joints with the normalized adjacency, then map coords."""
    ahat = normalized_adjacency(adjacency)
    return np.einsum("fg,ngd,dc->nfc", ahat, frames, theta)


def _gcn_backward(frames, adjacency, theta, grad):
    ahat = normalized_adjacency(adjacency)
    g_theta = np.einsum("fg,ngd,nfc->dc", ahat, frames, grad)
    g_frames = np.einsum("fg,nfc,dc->ngd", ahat, grad, theta)
    return g_frames, g_theta


# ---------------------------------------------------------------------------
# recurrent cells


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _rnn_forward_batch(x, u, w, b, v, vb, cell):
    """Unroll a recurrent cell over (B, T, c) input; outputs are V h_t + vb."""
    B, T, _ = x.shape
    H = w.shape[0]
    h = np.zeros((B, H))
    c_state = np.zeros((B, H))
    hs = [h]
    steps = []
    outputs = np.empty((B, T, H))
    for t in range(T):
        z = x[:, t] @ u + h @ w + b
        if cell == "vanilla":
            h = np.tanh(z)
            steps.append((h,))
        else:
            i = _sigmoid(z[:, :H])
            f = _sigmoid(z[:, H : 2 * H])
            g = np.tanh(z[:, 2 * H : 3 * H])
            o = _sigmoid(z[:, 3 * H :])
            c_prev = c_state
            c_state = f * c_prev + i * g
            tc = np.tanh(c_state)
            h = o * tc
            steps.append((i, f, g, o, c_prev, c_state, tc))
        hs.append(h)
        outputs[:, t] = h @ v + vb
    cache = (x, u, w, v, cell, hs, steps)
    return outputs, cache


def _rnn_backward_batch(cache, g_out):
    x, u, w, v, cell, hs, steps = cache
    B, T, _ = x.shape
    H = w.shape[0]
    gx = np.zeros_like(x)
    gu = np.zeros_like(u)
    gw = np.zeros_like(w)
    gb = np.zeros(u.shape[1])
    gv = np.zeros_like(v)
    gvb = np.zeros(H)
    gh_carry = np.zeros((B, H))
    gc_carry = np.zeros((B, H))
    for t in range(T - 1, -1, -1):
        go = g_out[:, t]
        gv += hs[t + 1].T @ go
        gvb += go.sum(axis=0)
        gh = go @ v.T + gh_carry
        if cell == "vanilla":
            (h,) = steps[t]
            gz = gh * (1.0 - h * h)
        else:
            i, f, g, o, c_prev, c_state, tc = steps[t]
            gc = gc_carry + gh * o * (1.0 - tc * tc)
            gz = np.concatenate(
                [
                    gc * g * i * (1.0 - i),
                    gc * c_prev * f * (1.0 - f),
                    gc * i * (1.0 - g * g),
                    gh * tc * o * (1.0 - o),
                ],
                axis=1,
            )
            gc_carry = gc * f
        gu += x[:, t].T @ gz
        gw += hs[t].T @ gz
        gb += gz.sum(axis=0)
        gx[:, t] = gz @ u.T
        gh_carry = gz @ w.T
    return gx, gu, gw, gb, gv, gvb


def rnn_forward(seq: np.ndarray, params: dict, cell: str = "vanilla"):
    """Single-sequence unroll; returns the per-step outputs and final hidden state."""
    if cell not in CELLS:
        raise ValueError(f"unknown cell {cell!r}")
    out, cache = _rnn_forward_batch(
        np.asarray(seq, dtype=np.float64)[None],
        params["u"], params["w"], params["b"], params["v"], params["vb"], cell,
    )
    hs = cache[5]
    return out[0], hs[-1][0]


# ---------------------------------------------------------------------------
# losses


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def cross_entropy(logits: np.ndarray, labels: np.ndarray):
    """Mean softmax cross-entropy and its gradient w.r.t. the logits."""
    labels = np.asarray(labels, dtype=np.intp)
    B = logits.shape[0]
    z = logits - logits.max(axis=1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=1))
    loss = float(np.mean(lse - z[np.arange(B), labels]))
    grad = softmax(logits)
    grad[np.arange(B), labels] -= 1.0
    return loss, grad / B


# ---------------------------------------------------------------------------
# model


def _glorot(rng, fan_in, fan_out, shape=None):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape or (fan_in, fan_out))


def input_spec(samples) -> tuple[int, int]:
    """(joints, coords) shared by all samples; paths count as one joint."""
    spec = None
    for s in samples:
        cur = (1, s.width) if isinstance(s, TimedPath) else (s.num_joints, s.num_coords)
        if spec is None:
            spec = cur
        elif cur != spec:
            raise ValueError(f"mixed input shapes in dataset: {spec} vs {cur}")
    if spec is None:
        raise ValueError("empty dataset")
    return spec


def _rnn_param_shapes(in_dim, hidden, cell):
    gate = 4 * hidden if cell == "lstm" else hidden
    return {"u": (in_dim, gate), "w": (hidden, gate), "b": (gate,), "v": (hidden, hidden), "vb": (hidden,)}


class StreamClassifier:
    """Sequence classifier over timed paths or skeleton sequences."""

    def __init__(self, config: ModelConfig, spec: tuple[int, int], params: dict):
        config.validate()
        self.config = config
        self.spec = spec
        self.params = params
        self._plan()

    def _plan(self):
        cfg = self.config
        F, D = self.spec
        if cfg.variant == "el-logsig-rnn":
            width = cfg.embed_dim if cfg.use_embedding else F * D
        elif cfg.variant.startswith("gcn"):
            width = cfg.gcn_dim
        else:
            width = F * D
        if cfg.use_time and cfg.variant != "frame-rnn":
            width += 1
        self.path_width = width
        if cfg.variant == "frame-rnn":
            self.rnn_in = F * D
        else:
            self.rnn_in = logsig_dim(width, cfg.degree) + (width if cfg.use_start_points else 0)
            self.basis = enumerate_lyndon(width, cfg.degree)
        if cfg.variant == "gcn-logsig-rnn-2":
            width2 = cfg.gcn_dim + (1 if cfg.use_time else 0)
            self.path_width2 = width2
            self.rnn_in2 = logsig_dim(width2, cfg.degree) + (width2 if cfg.use_start_points else 0)
            self.basis2 = enumerate_lyndon(width2, cfg.degree)

    @classmethod
    def build(cls, config: ModelConfig, spec: tuple[int, int], seed_or_rng=0) -> "StreamClassifier":
        config.validate()
        rng = seed_or_rng if isinstance(seed_or_rng, np.random.Generator) else np.random.default_rng(seed_or_rng)
        model = cls(config, spec, {})
        F, D = spec
        p: dict[str, np.ndarray] = {}
        cfg = config
        if cfg.variant == "el-logsig-rnn" and cfg.use_embedding:
            c1 = cfg.embed_channels
            p["embed.point_w"] = _glorot(rng, D, c1)
            p["embed.point_b"] = np.zeros(c1)
            p["embed.mix_w"] = _glorot(rng, F * c1, cfg.embed_dim)
            p["embed.mix_b"] = np.zeros(cfg.embed_dim)
        if cfg.variant.startswith("gcn"):
            p["gcn.theta"] = _glorot(rng, D, cfg.gcn_dim)
        for name, shape in _rnn_param_shapes(model.rnn_in, cfg.hidden, cfg.cell).items():
            p[f"rnn.{name}"] = np.zeros(shape) if len(shape) == 1 else _glorot(rng, *shape, shape=shape)
        if cfg.variant == "gcn-logsig-rnn-2":
            p["gcn2.theta"] = _glorot(rng, cfg.hidden, cfg.gcn_dim)
            for name, shape in _rnn_param_shapes(model.rnn_in2, cfg.hidden, cfg.cell).items():
                p[f"rnn2.{name}"] = np.zeros(shape) if len(shape) == 1 else _glorot(rng, *shape, shape=shape)
        p["head.w"] = _glorot(rng, cfg.hidden, cfg.num_classes)
        p["head.b"] = np.zeros(cfg.num_classes)
        model.params = p
        return model

    # -- front ends ---------------------------------------------------------

    def _as_frames(self, sample):
        if isinstance(sample, TimedPath):
            return sample.times, sample.points[:, None, :]
        return sample.times, sample.frames

    def _transform_tail(self, seq, times, basis, num_segments):
        """AL / TL / logsig / start points, shared by the EL and GCN variants."""
        cfg = self.config
        cache = {}
        if cfg.use_accumulative:
            seq = accumulative_layer(seq)
        if cfg.use_time:
            seq = time_incorporated_layer(seq, times)
        path = TimedPath(times, seq)
        partition = SegmentPartition.uniform(times[0], times[-1], num_segments)
        rows, lstate = logsig_sequence_forward(path, partition, cfg.degree, basis)
        out = rows
        if cfg.use_start_points:
            out = add_start_points(rows, path, partition.boundaries)
        cache.update(path=path, partition=partition, lstate=lstate, d_ls=rows.shape[1])
        return out, cache

    def _transform_tail_backward(self, cache, grad):
        cfg = self.config
        path, partition = cache["path"], cache["partition"]
        d_ls = cache["d_ls"]
        g_points = np.zeros_like(path.points)
        if cfg.use_start_points:
            g_rows, g_starts = grad[:, :d_ls], grad[:, d_ls:]
            g_points += _start_points_backward(path, partition.boundaries, g_starts)
        else:
            g_rows = grad
        g_points += backward_from_state(cache["lstate"], g_rows)
        if cfg.use_time:
            g_points = g_points[:, 1:]
        if cfg.use_accumulative:
            g_points = _accumulative_backward(g_points)
        return g_points

    def _el_front(self, sample):
        cfg = self.config
        times, frames = self._as_frames(sample)
        cache = {"frames": frames}
        if cfg.use_embedding:
            seq = embedding_forward(
                frames,
                self.params["embed.point_w"], self.params["embed.point_b"],
                self.params["embed.mix_w"], self.params["embed.mix_b"],
            )
        else:
            seq = frames.reshape(frames.shape[0], -1)
        out, tail = self._transform_tail(seq, times, self.basis, cfg.num_segments)
        cache["tail"] = tail
        return out, cache

    def _el_front_backward(self, cache, grad, grads):
        cfg = self.config
        g_seq = self._transform_tail_backward(cache["tail"], grad)
        if cfg.use_embedding:
            frames = cache["frames"]
            _, gpw, gpb, gmw, gmb = _embedding_backward(
                frames,
                self.params["embed.point_w"], self.params["embed.point_b"],
                self.params["embed.mix_w"], g_seq,
            )
            grads["embed.point_w"] += gpw
            grads["embed.point_b"] += gpb
            grads["embed.mix_w"] += gmw
            grads["embed.mix_b"] += gmb

    def _gcn_front(self, sample):
        """Both GCN variants: per-joint logsig rows, shared recurrent unroll."""
        cfg = self.config
        if sample.adjacency is None:
            raise ValueError("gcn variants require an adjacency matrix")
        times, frames = sample.times, sample.frames
        mixed = gcn_forward(frames, sample.adjacency, self.params["gcn.theta"])
        F = mixed.shape[1]
        joint_in = np.empty((F, cfg.num_segments, self.rnn_in))
        tails = []
        for f in range(F):
            rows, tail = self._transform_tail(mixed[:, f, :], times, self.basis, cfg.num_segments)
            joint_in[f] = rows
            tails.append(tail)
        out1, rnn_cache = _rnn_forward_batch(
            joint_in,
            self.params["rnn.u"], self.params["rnn.w"], self.params["rnn.b"],
            self.params["rnn.v"], self.params["rnn.vb"], cfg.cell,
        )
        cache = {"sample": sample, "mixed": mixed, "tails": tails, "rnn": rnn_cache, "joint_in": joint_in}
        if cfg.variant == "gcn-logsig-rnn-2":
            frames2 = out1.transpose(1, 0, 2)  # (N, F, hidden) sequence of graphs
            times2 = np.arange(cfg.num_segments, dtype=np.float64)
            mixed2 = gcn_forward(frames2, sample.adjacency, self.params["gcn2.theta"])
            joint_in2 = np.empty((F, cfg.num_segments2, self.rnn_in2))
            tails2 = []
            for f in range(F):
                rows, tail = self._transform_tail(mixed2[:, f, :], times2, self.basis2, cfg.num_segments2)
                joint_in2[f] = rows
                tails2.append(tail)
            out2, rnn_cache2 = _rnn_forward_batch(
                joint_in2,
                self.params["rnn2.u"], self.params["rnn2.w"], self.params["rnn2.b"],
                self.params["rnn2.v"], self.params["rnn2.vb"], cfg.cell,
            )
            cache.update(frames2=frames2, mixed2=mixed2, tails2=tails2, rnn2=rnn_cache2)
            final = out2
        else:
            final = out1
        pooled = final[:, -1, :].mean(axis=0)
        cache["num_joints"] = F
        return pooled, cache

    def _gcn_front_backward(self, cache, g_pooled, grads):
        cfg = self.config
        sample = cache["sample"]
        F = cache["num_joints"]
        if cfg.variant == "gcn-logsig-rnn-2":
            g_out2 = np.zeros((F, cfg.num_segments2, cfg.hidden))
            g_out2[:, -1, :] = g_pooled[None, :] / F
            gx2, gu2, gw2, gb2, gv2, gvb2 = _rnn_backward_batch(cache["rnn2"], g_out2)
            for name, g in zip(("u", "w", "b", "v", "vb"), (gu2, gw2, gb2, gv2, gvb2)):
                grads[f"rnn2.{name}"] += g
            g_mixed2 = np.zeros_like(cache["mixed2"])
            for f in range(F):
                g_mixed2[:, f, :] = self._transform_tail_backward(cache["tails2"][f], gx2[f])
            g_frames2, g_theta2 = _gcn_backward(
                cache["frames2"], sample.adjacency, self.params["gcn2.theta"], g_mixed2
            )
            grads["gcn2.theta"] += g_theta2
            g_out1 = g_frames2.transpose(1, 0, 2)
        else:
            B, T, H = cache["joint_in"].shape[0], cfg.num_segments, cfg.hidden
            g_out1 = np.zeros((B, T, H))
            g_out1[:, -1, :] = g_pooled[None, :] / F
        gx1, gu, gw, gb, gv, gvb = _rnn_backward_batch(cache["rnn"], g_out1)
        for name, g in zip(("u", "w", "b", "v", "vb"), (gu, gw, gb, gv, gvb)):
            grads[f"rnn.{name}"] += g
        g_mixed = np.zeros_like(cache["mixed"])
        for f in range(F):
            g_mixed[:, f, :] = self._transform_tail_backward(cache["tails"][f], gx1[f])
        _, g_theta = _gcn_backward(sample.frames, sample.adjacency, self.params["gcn.theta"], g_mixed)
        grads["gcn.theta"] += g_theta

    # -- forward / backward over a batch -------------------------------------

    def forward_batch(self, samples):
        cfg = self.config
        caches = []
        if cfg.variant == "el-logsig-rnn":
            rnn_x = np.empty((len(samples), cfg.num_segments, self.rnn_in))
            for i, s in enumerate(samples):
                rows, cache = self._el_front(s)
                if rows.shape != (cfg.num_segments, self.rnn_in):
                    raise AssertionError(
                        f"recurrent input must be ({cfg.num_segments}, {self.rnn_in}), got {rows.shape}"
                    )
                rnn_x[i] = rows
                caches.append(cache)
            out, rnn_cache = _rnn_forward_batch(
                rnn_x,
                self.params["rnn.u"], self.params["rnn.w"], self.params["rnn.b"],
                self.params["rnn.v"], self.params["rnn.vb"], cfg.cell,
            )
            feats = out[:, -1, :]
            batch_cache = {"fronts": caches, "rnn": rnn_cache, "feats": feats}
        elif cfg.variant == "frame-rnn":
            feats = np.empty((len(samples), cfg.hidden))
            for i, s in enumerate(samples):
                times, frames = self._as_frames(s)
                x = frames.reshape(frames.shape[0], -1)
                if cfg.resample_frames > 0:
                    grid = np.linspace(times[0], times[-1], cfg.resample_frames)
                    x = evaluate(TimedPath(times, x), grid)
                out, rnn_cache = _rnn_forward_batch(
                    x[None],
                    self.params["rnn.u"], self.params["rnn.w"], self.params["rnn.b"],
                    self.params["rnn.v"], self.params["rnn.vb"], cfg.cell,
                )
                feats[i] = out[0, -1, :]
                caches.append({"rnn": rnn_cache})
            batch_cache = {"fronts": caches, "feats": feats}
        else:
            feats = np.empty((len(samples), cfg.hidden))
            for i, s in enumerate(samples):
                pooled, cache = self._gcn_front(s)
                feats[i] = pooled
                caches.append(cache)
            batch_cache = {"fronts": caches, "feats": feats}
        logits = feats @ self.params["head.w"] + self.params["head.b"]
        batch_cache["logits"] = logits
        return logits, batch_cache

    def backward_batch(self, batch_cache, g_logits):
        cfg = self.config
        grads = {name: np.zeros_like(p) for name, p in self.params.items()}
        feats = batch_cache["feats"]
        grads["head.w"] += feats.T @ g_logits
        grads["head.b"] += g_logits.sum(axis=0)
        g_feats = g_logits @ self.params["head.w"].T
        fronts = batch_cache["fronts"]
        if cfg.variant == "el-logsig-rnn":
            rnn_cache = batch_cache["rnn"]
            B, T = len(fronts), cfg.num_segments
            g_out = np.zeros((B, T, cfg.hidden))
            g_out[:, -1, :] = g_feats
            gx, gu, gw, gb, gv, gvb = _rnn_backward_batch(rnn_cache, g_out)
            for name, g in zip(("u", "w", "b", "v", "vb"), (gu, gw, gb, gv, gvb)):
                grads[f"rnn.{name}"] += g
            for i, cache in enumerate(fronts):
                self._el_front_backward(cache, gx[i], grads)
        elif cfg.variant == "frame-rnn":
            for i, cache in enumerate(fronts):
                rnn_cache = cache["rnn"]
                T = rnn_cache[0].shape[1]
                g_out = np.zeros((1, T, cfg.hidden))
                g_out[0, -1, :] = g_feats[i]
                _, gu, gw, gb, gv, gvb = _rnn_backward_batch(rnn_cache, g_out)
                for name, g in zip(("u", "w", "b", "v", "vb"), (gu, gw, gb, gv, gvb)):
                    grads[f"rnn.{name}"] += g
        else:
            for i, cache in enumerate(fronts):
                self._gcn_front_backward(cache, g_feats[i], grads)
        return grads

    def logits(self, sample) -> np.ndarray:
        out, _ = self.forward_batch([sample])
        return out[0]

    def predict(self, samples, batch_size: int = 64) -> np.ndarray:
        preds = np.empty(len(samples), dtype=np.intp)
        for start in range(0, len(samples), batch_size):
            chunk = samples[start : start + batch_size]
            logits, _ = self.forward_batch(chunk)
            preds[start : start + len(chunk)] = logits.argmax(axis=1)
        return preds


def logsig_rnn_forward(sample, config: ModelConfig, params: dict) -> np.ndarray:
    """Class logits of the embedding-variant model for one stream."""
    spec = input_spec([sample])
    return StreamClassifier(config, spec, params).logits(sample)


def gcn_logsig_rnn_forward(sample: SkeletonSequence, config: ModelConfig, params: dict) -> np.ndarray:
    """Class logits of a GCN-variant model for one skeleton sequence."""
    spec = input_spec([sample])
    return StreamClassifier(config, spec, params).logits(sample)


# ---------------------------------------------------------------------------
# training


def train(
    config: ModelConfig,
    train_samples,
    train_labels,
    settings: TrainSettings | None = None,
    eval_samples=None,
    eval_labels=None,
) -> TrainResult:
    """Mini-batch SGD with momentum on softmax cross-entropy."""
    settings = settings or TrainSettings()
    labels = np.asarray(train_labels, dtype=np.intp)
    if len(train_samples) == 0:
        raise ValueError("empty training set")
    if labels.min() < 0 or labels.max() >= config.num_classes:
        raise ValueError("labels out of range for the configured class count")
    rng = np.random.default_rng(settings.seed)
    model = StreamClassifier.build(config, input_spec(train_samples), rng)
    velocity = {name: np.zeros_like(p) for name, p in model.params.items()}
    trace = []
    count = len(train_samples)
    for epoch in range(settings.epochs):
        tic = time.perf_counter()
        order = rng.permutation(count)
        epoch_loss = 0.0
        epoch_correct = 0
        for start in range(0, count, settings.batch_size):
            idx = order[start : start + settings.batch_size]
            batch = [train_samples[i] for i in idx]
            logits, cache = model.forward_batch(batch)
            loss, g_logits = cross_entropy(logits, labels[idx])
            if not np.isfinite(loss):
                raise RuntimeError(
                    f"non-finite loss at epoch {epoch}, batch starting {start}: {loss}"
                )
            grads = model.backward_batch(cache, g_logits)
            if settings.clip_norm is not None:
                total = np.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
                if total > settings.clip_norm:
                    scale = settings.clip_norm / total
                    for g in grads.values():
                        g *= scale
            for name, p in model.params.items():
                velocity[name] = settings.momentum * velocity[name] - settings.learning_rate * grads[name]
                p += velocity[name]
            epoch_loss += loss * len(idx)
            epoch_correct += int((logits.argmax(axis=1) == labels[idx]).sum())
        record = {
            "epoch": epoch,
            "loss": epoch_loss / count,
            "accuracy": epoch_correct / count,
            "seconds": time.perf_counter() - tic,
        }
        if eval_samples is not None:
            record["eval_accuracy"] = evaluate_model(model, eval_samples, eval_labels).accuracy
        trace.append(record)
    return TrainResult(config=config, params=model.params, trace=trace)


@dataclass
class EvalResult:
    accuracy: float
    confusion: np.ndarray
    predictions: np.ndarray


def evaluate_model(model_or_config, samples, labels, params: dict | None = None) -> EvalResult:
    """Accuracy and confusion matrix on a labeled set."""
    if isinstance(model_or_config, StreamClassifier):
        model = model_or_config
    else:
        model = StreamClassifier(model_or_config, input_spec(samples), params)
    labels = np.asarray(labels, dtype=np.intp)
    preds = model.predict(samples)
    C = model.config.num_classes
    confusion = np.zeros((C, C), dtype=np.int64)
    np.add.at(confusion, (labels, preds), 1)
    return EvalResult(
        accuracy=float((preds == labels).mean()),
        confusion=confusion,
        predictions=preds,
    )

