"""Four-layer recurrent language model, written from scratch in float64.

Architecture: embedding lookup, two stacked LSTM layers, dense softmax
over the vocabulary, trained for next-word prediction with exact
backpropagation through time.

Gate packing is (input, forget, candidate, output) along the last axis
of each layer's W (in_dim x 4H), U (H x 4H), and b (4H). Padded
timesteps freeze both recurrent states by selection (np.where), never
by arithmetic masking, which makes padding provably inert: appending
PAD tokens changes no real-timestep activation, no loss value, and no
gradient entry.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import container
from .errors import CheckpointError, NonFiniteLoss, TokenOutOfRange

PROB_FLOOR = 1e-12


@dataclass
class ModelConfig:
    vocab_size: int
    embedding_dim: int = 32
    hidden1: int = 64
    hidden2: int = 64
    max_seq_len: int = 16
    init_scale: float = 0.1
    rng_seed: int = 0

    def __post_init__(self):
        if self.vocab_size < 3:
            raise ValueError("vocab_size must be >= 3 (PAD, UNK, one word)")
        if min(self.embedding_dim, self.hidden1, self.hidden2) < 1:
            raise ValueError("layer dimensions must be >= 1")
        if self.max_seq_len < 1:
            raise ValueError("max_seq_len must be >= 1")
        if not self.init_scale > 0:
            raise ValueError("init_scale must be > 0")


@dataclass
class ModelParams:
    config: ModelConfig
    embedding: np.ndarray  # (V, E)
    w1: np.ndarray  # (E, 4*H1)
    u1: np.ndarray  # (H1, 4*H1)
    b1: np.ndarray  # (4*H1,)
    w2: np.ndarray  # (H1, 4*H2)
    u2: np.ndarray  # (H2, 4*H2)
    b2: np.ndarray  # (4*H2,)
    w_out: np.ndarray  # (H2, V)
    b_out: np.ndarray  # (V,)

    def tensors(self) -> dict[str, np.ndarray]:
        return {
            "embedding": self.embedding,
            "w1": self.w1,
            "u1": self.u1,
            "b1": self.b1,
            "w2": self.w2,
            "u2": self.u2,
            "b2": self.b2,
            "w_out": self.w_out,
            "b_out": self.b_out,
        }

    def expected_shapes(self) -> dict[str, tuple[int, ...]]:
        c = self.config
        return _expected_shapes(c)

    @classmethod
    def from_tensors(
        cls, config: ModelConfig, tensors: dict[str, np.ndarray]
    ) -> "ModelParams":
        expected = _expected_shapes(config)
        if set(tensors) != set(expected):
            raise CheckpointError(
                f"tensor names {sorted(tensors)} do not match {sorted(expected)}"
            )
        for name, shape in expected.items():
            if tensors[name].shape != shape:
                raise CheckpointError(
                    f"tensor {name!r} has shape {tensors[name].shape}, "
                    f"expected {shape}"
                )
        return cls(config=config, **{k: tensors[k] for k in expected})


def _expected_shapes(c: ModelConfig) -> dict[str, tuple[int, ...]]:
    v, e, h1, h2 = c.vocab_size, c.embedding_dim, c.hidden1, c.hidden2
    return {
        "embedding": (v, e),
        "w1": (e, 4 * h1),
        "u1": (h1, 4 * h1),
        "b1": (4 * h1,),
        "w2": (h1, 4 * h2),
        "u2": (h2, 4 * h2),
        "b2": (4 * h2,),
        "w_out": (h2, v),
        "b_out": (v,),
    }


def init_params(config: ModelConfig) -> ModelParams:
    """Seeded init: weights uniform in +-init_scale, forget biases 1, rest 0."""
    rng = np.random.default_rng(config.rng_seed)
    s = config.init_scale
    v, e, h1, h2 = config.vocab_size, config.embedding_dim, config.hidden1, config.hidden2

    def u(*shape):
        return rng.uniform(-s, s, size=shape)

    b1 = np.zeros(4 * h1)
    b1[h1 : 2 * h1] = 1.0
    b2 = np.zeros(4 * h2)
    b2[h2 : 2 * h2] = 1.0
    return ModelParams(
        config=config,
        embedding=u(v, e),
        w1=u(e, 4 * h1),
        u1=u(h1, 4 * h1),
        b1=b1,
        w2=u(h1, 4 * h2),
        u2=u(h2, 4 * h2),
        b2=b2,
        w_out=u(h2, v),
        b_out=np.zeros(v),
    )


def _sigmoid(x: np.ndarray) -> np.ndarray:
    e = np.exp(-np.abs(x))
    return np.where(x >= 0.0, 1.0 / (1.0 + e), e / (1.0 + e))


def _cell(x, h_prev, c_prev, w, u, b):
    h = h_prev.shape[-1]
    a = x @ w + h_prev @ u + b
    i = _sigmoid(a[..., :h])
    f = _sigmoid(a[..., h : 2 * h])
    g = np.tanh(a[..., 2 * h : 3 * h])
    o = _sigmoid(a[..., 3 * h :])
    c_new = f * c_prev + i * g
    tanh_c = np.tanh(c_new)
    h_new = o * tanh_c
    return h_new, c_new, (x, h_prev, c_prev, i, f, g, o, tanh_c)


def lstm_cell_step(x, h_prev, c_prev, w, u, b):
    """One LSTM step; returns (h, c)."""
    h_new, c_new, _ = _cell(
        np.asarray(x, dtype=np.float64),
        np.asarray(h_prev, dtype=np.float64),
        np.asarray(c_prev, dtype=np.float64),
        w,
        u,
        b,
    )
    return h_new, c_new


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


@dataclass
class ForwardPass:
    """Batch activations; per-layer states are post-freeze values."""

    emb: np.ndarray  # (B, T, E)
    h1: np.ndarray  # (B, T, H1)
    c1: np.ndarray  # (B, T, H1)
    h2: np.ndarray  # (B, T, H2)
    c2: np.ndarray  # (B, T, H2)
    probs: np.ndarray  # (B, T, V)
    caches1: list | None = None
    caches2: list | None = None


@dataclass
class LayerActivations:
    """Single-sentence view of ForwardPass, one row per timestep."""

    emb: np.ndarray
    h1: np.ndarray
    c1: np.ndarray
    h2: np.ndarray
    c2: np.ndarray
    probs: np.ndarray


def forward(
    params: ModelParams,
    tokens: np.ndarray,
    mask: np.ndarray,
    want_cache: bool = False,
) -> ForwardPass:
    """Run the batch through all four layers with state freeze at pads."""
    tokens = np.asarray(tokens, dtype=np.int64)
    mask = np.asarray(mask, dtype=bool)
    if tokens.ndim != 2 or mask.shape != tokens.shape:
        raise ValueError("tokens and mask must be matching 2-D arrays")
    v = params.config.vocab_size
    if tokens.size and (tokens.min() < 0 or tokens.max() >= v):
        raise TokenOutOfRange(
            f"token ids must be in [0, {v}), found "
            f"[{tokens.min()}, {tokens.max()}]"
        )
    b, t_len = tokens.shape
    h1d, h2d = params.config.hidden1, params.config.hidden2
    emb = params.embedding[tokens]
    h1 = np.zeros((b, h1d))
    c1 = np.zeros((b, h1d))
    h2 = np.zeros((b, h2d))
    c2 = np.zeros((b, h2d))
    h1s = np.empty((b, t_len, h1d))
    c1s = np.empty((b, t_len, h1d))
    h2s = np.empty((b, t_len, h2d))
    c2s = np.empty((b, t_len, h2d))
    caches1 = [] if want_cache else None
    caches2 = [] if want_cache else None
    for t in range(t_len):
        m = mask[:, t][:, None]
        h1n, c1n, cache1 = _cell(emb[:, t], h1, c1, params.w1, params.u1, params.b1)
        h1 = np.where(m, h1n, h1)
        c1 = np.where(m, c1n, c1)
        h2n, c2n, cache2 = _cell(h1, h2, c2, params.w2, params.u2, params.b2)
        h2 = np.where(m, h2n, h2)
        c2 = np.where(m, c2n, c2)
        h1s[:, t] = h1
        c1s[:, t] = c1
        h2s[:, t] = h2
        c2s[:, t] = c2
        if want_cache:
            caches1.append(cache1)
            caches2.append(cache2)
    probs = softmax(h2s @ params.w_out + params.b_out)
    return ForwardPass(
        emb=emb, h1=h1s, c1=c1s, h2=h2s, c2=c2s, probs=probs,
        caches1=caches1, caches2=caches2,
    )


def forward_row(params: ModelParams, token_row, mask_row) -> LayerActivations:
    fwd = forward(params, np.asarray(token_row)[None, :], np.asarray(mask_row)[None, :])
    return LayerActivations(
        emb=fwd.emb[0], h1=fwd.h1[0], c1=fwd.c1[0],
        h2=fwd.h2[0], c2=fwd.c2[0], probs=fwd.probs[0],
    )


def _target_weights(mask: np.ndarray) -> np.ndarray:
    # position t predicts token t+1; it counts only when that target is real
    return mask[:, 1:].astype(np.float64)


def loss_from_probs(probs: np.ndarray, tokens: np.ndarray, mask: np.ndarray) -> float:
    """Masked mean cross-entropy of next-token prediction."""
    targets = tokens[:, 1:]
    w = _target_weights(mask)
    wsum = w.sum()
    if wsum == 0.0:
        return 0.0
    picked = np.take_along_axis(probs[:, :-1], targets[..., None], axis=2)[..., 0]
    # sum only the real-target entries; the reduction then sees the same
    # value sequence whether or not pad columns were appended
    terms = -np.log(np.maximum(picked[w > 0.0], PROB_FLOOR))
    return float(terms.sum() / wsum)


def loss(params: ModelParams, tokens: np.ndarray, mask: np.ndarray) -> float:
    return loss_from_probs(forward(params, tokens, mask).probs, tokens, mask)


def _layer_backward(caches, mask, d_states, w, u):
    """BPTT through one LSTM layer.

    d_states (B, T, H) holds the loss gradient w.r.t. the post-freeze
    hidden state at each step. Returns the gradient w.r.t. the layer
    input sequence and the parameter gradients.
    """
    t_len = len(caches)
    b, h = d_states.shape[0], d_states.shape[2]
    in_dim = w.shape[0]
    dw = np.zeros_like(w)
    du = np.zeros_like(u)
    db = np.zeros(4 * h)
    dx_seq = np.empty((b, t_len, in_dim))
    dh_carry = np.zeros((b, h))
    dc_carry = np.zeros((b, h))
    zero = np.zeros(())
    for t in reversed(range(t_len)):
        x, h_prev, c_prev, i, f, g, o, tanh_c = caches[t]
        m = mask[:, t][:, None]
        dh_total = d_states[:, t] + dh_carry
        dh_new = np.where(m, dh_total, zero)
        dh_pass = np.where(m, zero, dh_total)
        dc_new = np.where(m, dc_carry, zero)
        dc_pass = np.where(m, zero, dc_carry)
        do = dh_new * tanh_c
        dc_new = dc_new + dh_new * o * (1.0 - tanh_c * tanh_c)
        df = dc_new * c_prev
        di = dc_new * g
        dg = dc_new * i
        dc_carry = dc_new * f + dc_pass
        da = np.concatenate(
            [
                di * i * (1.0 - i),
                df * f * (1.0 - f),
                dg * (1.0 - g * g),
                do * o * (1.0 - o),
            ],
            axis=1,
        )
        dw += x.T @ da
        du += h_prev.T @ da
        db += da.sum(axis=0)
        dx_seq[:, t] = da @ w.T
        dh_carry = da @ u.T + dh_pass
    return dx_seq, dw, du, db


def backward(
    params: ModelParams, fwd: ForwardPass, tokens: np.ndarray, mask: np.ndarray
) -> dict[str, np.ndarray]:
    """Exact gradients of the masked loss for every parameter tensor.

    The probability floor in the loss is a numerical guard only; the
    gradient is the standard softmax cross-entropy one, which coincides
    with the floored loss everywhere the floor is inactive.
    """
    if fwd.caches1 is None:
        raise ValueError("forward pass must be run with want_cache=True")
    tokens = np.asarray(tokens, dtype=np.int64)
    mask = np.asarray(mask, dtype=bool)
    b, t_len = tokens.shape
    v = params.config.vocab_size
    w = _target_weights(mask)
    wsum = w.sum()
    grads = {name: np.zeros_like(arr) for name, arr in params.tensors().items()}
    if wsum == 0.0:
        return grads

    dlogits = np.zeros((b, t_len, v))
    dl = fwd.probs[:, :-1].copy()
    idx = tokens[:, 1:][..., None]
    np.put_along_axis(dl, idx, np.take_along_axis(dl, idx, axis=2) - 1.0, axis=2)
    dl *= (w / wsum)[..., None]
    dlogits[:, :-1] = dl

    # reduce over real-target positions only, so the contraction length
    # (hence its rounding) does not depend on appended pad columns
    sel = np.zeros((b, t_len), dtype=bool)
    sel[:, :-1] = w > 0.0
    flat_h2 = fwd.h2[sel]
    flat_dl = dlogits[sel]
    grads["w_out"] = flat_h2.T @ flat_dl
    grads["b_out"] = flat_dl.sum(axis=0)
    dh2 = np.zeros((b, t_len, params.config.hidden2))
    dh2[sel] = flat_dl @ params.w_out.T

    dx2, grads["w2"], grads["u2"], grads["b2"] = _layer_backward(
        fwd.caches2, mask, dh2, params.w2, params.u2
    )
    dx1, grads["w1"], grads["u1"], grads["b1"] = _layer_backward(
        fwd.caches1, mask, dx2, params.w1, params.u1
    )
    np.add.at(grads["embedding"], tokens, dx1)
    return grads


@dataclass
class TrainConfig:
    epochs: int = 30
    batch_size: int = 32
    learning_rate: float = 1e-3
    optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    clip_norm: float = 5.0
    shuffle_seed: int = 0

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if not self.clip_norm > 0:
            raise ValueError("clip_norm must be > 0")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    val_loss: float | None = None
    val_accuracy: float | None = None


@dataclass
class EvalResult:
    loss: float
    accuracy: float
    perplexity: float


def _clip_global_norm(grads: dict[str, np.ndarray], clip: float) -> None:
    total = 0.0
    for name in grads:
        total += float((grads[name] * grads[name]).sum())
    norm = np.sqrt(total)
    if norm > clip:
        scale = clip / norm
        for name in grads:
            grads[name] *= scale


def train(
    params: ModelParams,
    train_set,
    config: TrainConfig,
    val_set=None,
) -> tuple[ModelParams, list[EpochStats]]:
    """Mini-batch training; deterministic under the two seeds involved.

    train_set/val_set are EncodedCorpus instances. params is updated in
    place and also returned.
    """
    n = train_set.tokens.shape[0]
    if n == 0:
        raise ValueError("training corpus is empty")
    rng = np.random.default_rng(config.shuffle_seed)
    names = list(params.tensors())
    adam_m = {k: np.zeros_like(v) for k, v in params.tensors().items()}
    adam_v = {k: np.zeros_like(v) for k, v in params.tensors().items()}
    step = 0
    history: list[EpochStats] = []
    for epoch in range(1, config.epochs + 1):
        perm = rng.permutation(n)
        weighted_loss = 0.0
        weight_total = 0.0
        for batch_index, start in enumerate(range(0, n, config.batch_size)):
            rows = perm[start : start + config.batch_size]
            toks = train_set.tokens[rows]
            msk = train_set.mask[rows]
            fwd = forward(params, toks, msk, want_cache=True)
            batch_loss = loss_from_probs(fwd.probs, toks, msk)
            if not np.isfinite(batch_loss):
                raise NonFiniteLoss(epoch=epoch, batch=batch_index)
            grads = backward(params, fwd, toks, msk)
            _clip_global_norm(grads, config.clip_norm)
            step += 1
            tensors = params.tensors()
            if config.optimizer == "adam":
                b1c = 1.0 - config.beta1**step
                b2c = 1.0 - config.beta2**step
                for name in names:
                    g = grads[name]
                    adam_m[name] = config.beta1 * adam_m[name] + (1 - config.beta1) * g
                    adam_v[name] = config.beta2 * adam_v[name] + (1 - config.beta2) * g * g
                    mhat = adam_m[name] / b1c
                    vhat = adam_v[name] / b2c
                    tensors[name] -= config.learning_rate * mhat / (np.sqrt(vhat) + config.eps)
            else:
                for name in names:
                    tensors[name] -= config.learning_rate * grads[name]
            wsum = float(_target_weights(msk).sum())
            weighted_loss += batch_loss * wsum
            weight_total += wsum
        stats = EpochStats(
            epoch=epoch,
            train_loss=weighted_loss / weight_total if weight_total else 0.0,
        )
        if val_set is not None:
            ev = evaluate(params, val_set)
            stats.val_loss = ev.loss
            stats.val_accuracy = ev.accuracy
        history.append(stats)
    return params, history


def evaluate(params: ModelParams, data, batch_size: int = 256) -> EvalResult:
    """Masked next-word loss, accuracy, and perplexity over a corpus."""
    n = data.tokens.shape[0]
    weighted_loss = 0.0
    weight_total = 0.0
    correct = 0.0
    for start in range(0, n, batch_size):
        toks = data.tokens[start : start + batch_size]
        msk = data.mask[start : start + batch_size]
        fwd = forward(params, toks, msk)
        w = _target_weights(msk)
        wsum = float(w.sum())
        if wsum == 0.0:
            continue
        weighted_loss += loss_from_probs(fwd.probs, toks, msk) * wsum
        weight_total += wsum
        pred = fwd.probs[:, :-1].argmax(axis=2)
        correct += float(((pred == toks[:, 1:]) * w).sum())
    if weight_total == 0.0:
        return EvalResult(loss=0.0, accuracy=0.0, perplexity=1.0)
    mean_loss = weighted_loss / weight_total
    return EvalResult(
        loss=mean_loss,
        accuracy=correct / weight_total,
        perplexity=float(np.exp(mean_loss)),
    )


def save_checkpoint(
    path: str | Path, params: ModelParams, extra: dict | None = None
) -> None:
    container.save_container(
        path,
        kind="checkpoint",
        config={"model": asdict(params.config), "extra": extra or {}},
        tensors=params.tensors(),
    )


def load_checkpoint(path: str | Path) -> tuple[ModelParams, dict]:
    config, tensors = container.load_container(path, expected_kind="checkpoint")
    model_config = ModelConfig(**config["model"])
    params = ModelParams.from_tensors(model_config, tensors)
    for name, arr in params.tensors().items():
        if not np.isfinite(arr).all():
            raise CheckpointError(f"tensor {name!r} contains non-finite values")
    return params, config.get("extra", {})
