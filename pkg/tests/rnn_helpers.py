"""Independent oracles for the model tests and the acceptance suite."""

import math

import numpy as np

from ascprobe import rnn
from ascprobe.corpus import EncodedCorpus, Vocabulary


def scalar_cell_oracle(x, h_prev, c_prev, w, u, b):
    """Straight-line scalar evaluation of the LSTM gate equations.

    No vectorization anywhere; every value is computed with explicit
    index loops so this is an independent check on the batched code.
    Gate packing along the parameter columns is (i, f, g, o).
    """
    e = len(x)
    h = len(h_prev)

    def sig(v):
        return 1.0 / (1.0 + math.exp(-v))

    def gate(col):
        total = b[col]
        for k in range(e):
            total += x[k] * w[k, col]
        for k in range(h):
            total += h_prev[k] * u[k, col]
        return total

    h_new = np.empty(h)
    c_new = np.empty(h)
    for j in range(h):
        i_j = sig(gate(j))
        f_j = sig(gate(h + j))
        g_j = math.tanh(gate(2 * h + j))
        o_j = sig(gate(3 * h + j))
        c_j = f_j * c_prev[j] + i_j * g_j
        c_new[j] = c_j
        h_new[j] = o_j * math.tanh(c_j)
    return h_new, c_new


def random_encoded(seed, n, t, vocab):
    """Random padded batch with word ids in [2, vocab)."""
    rng = np.random.default_rng(seed)
    tokens = np.zeros((n, t), dtype=np.int64)
    mask = np.zeros((n, t), dtype=bool)
    for i in range(n):
        length = int(rng.integers(2, t + 1))
        tokens[i, :length] = rng.integers(2, vocab, size=length)
        mask[i, :length] = True
    words = sorted(f"w{k}" for k in range(vocab - 2))
    return EncodedCorpus(
        tokens=tokens,
        mask=mask,
        labels=rng.integers(0, 4, size=n).astype(np.int64),
        vocab=Vocabulary(words=words),
        t_max=t,
    )


def finite_difference_max_rel_err(
    seed, n_sentences=4, epsilon=1e-5, denom_floor=1e-6
):
    """Max relative error of analytic vs central-difference gradients.

    Uses the small architecture V=8, E=3, H1=H2=4, T=5. The relative
    error denominator is floored so parameters with an exactly zero
    gradient compare against finite-difference noise fairly.
    """
    config = rnn.ModelConfig(
        vocab_size=8, embedding_dim=3, hidden1=4, hidden2=4, max_seq_len=5,
        init_scale=0.1, rng_seed=seed,
    )
    params = rnn.init_params(config)
    data = random_encoded(seed=seed + 1000, n=n_sentences, t=5, vocab=8)
    tokens, mask = data.tokens, data.mask

    fwd = rnn.forward(params, tokens, mask, want_cache=True)
    grads = rnn.backward(params, fwd, tokens, mask)

    worst = 0.0
    for name, tensor in params.tensors().items():
        flat = tensor.reshape(-1)
        gflat = grads[name].reshape(-1)
        for idx in range(flat.size):
            keep = flat[idx]
            flat[idx] = keep + epsilon
            up = rnn.loss(params, tokens, mask)
            flat[idx] = keep - epsilon
            down = rnn.loss(params, tokens, mask)
            flat[idx] = keep
            fd = (up - down) / (2.0 * epsilon)
            denom = max(abs(fd), abs(gflat[idx]), denom_floor)
            worst = max(worst, abs(fd - gflat[idx]) / denom)
    return worst
