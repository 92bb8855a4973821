"""Sentence representations: one vector per sentence per layer.

Layers are Embedding, Lstm1, Lstm2, and Output. Under the default
"last" policy a sentence is summarized by the hidden state at its final
real timestep, with one stated exception: the Embedding layer uses the
masked mean, because its last-timestep vector is a single word
embedding with no sentence-level content. The Output layer always
contributes the post-softmax probability vector. The policy actually
applied to each layer is recorded in the table metadata.

Extraction is embarrassingly parallel over sentences: read-only params,
chunked across a thread pool (numpy releases the GIL in the heavy
math), with every chunk written into preallocated tables at its corpus
offset so results are in corpus order and bitwise deterministic
regardless of completion order.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path

import numpy as np

from . import container, rnn
from .errors import EmptySentence, VocabMismatch
from .parallel import max_workers

POOLING_POLICIES = ("last", "mean")


class LayerId(IntEnum):
    Embedding = 1
    Lstm1 = 2
    Lstm2 = 3
    Output = 4


@dataclass
class ActivationTable:
    layer: LayerId
    matrix: np.ndarray  # (N, D_layer)
    labels: np.ndarray  # (N,)
    policy: str  # policy applied to this layer
    checkpoint_hash: str = ""


def _pooled(seq: np.ndarray, mask_row: np.ndarray, policy: str) -> np.ndarray:
    real = np.flatnonzero(mask_row)
    if real.size == 0:
        raise EmptySentence("sentence has no real timesteps")
    if policy == "last":
        return seq[real[-1]]
    return seq[real].mean(axis=0)


def layer_policy(layer: LayerId, policy: str) -> str:
    """The policy actually applied: Embedding swaps "last" for "mean"."""
    if layer == LayerId.Embedding and policy == "last":
        return "mean"
    return policy


def sentence_representation(
    acts: rnn.LayerActivations,
    mask_row: np.ndarray,
    layer: LayerId,
    policy: str = "last",
) -> np.ndarray:
    if policy not in POOLING_POLICIES:
        raise ValueError(f"unknown pooling policy {policy!r}")
    seq = {
        LayerId.Embedding: acts.emb,
        LayerId.Lstm1: acts.h1,
        LayerId.Lstm2: acts.h2,
        LayerId.Output: acts.probs,
    }[layer]
    return _pooled(seq, np.asarray(mask_row, dtype=bool), layer_policy(layer, policy))


def _extract_chunk(params, encoded, rows, policy, tables):
    fwd = rnn.forward(params, encoded.tokens[rows], encoded.mask[rows])
    seqs = {
        LayerId.Embedding: fwd.emb,
        LayerId.Lstm1: fwd.h1,
        LayerId.Lstm2: fwd.h2,
        LayerId.Output: fwd.probs,
    }
    for layer, seq in seqs.items():
        applied = layer_policy(layer, policy)
        out = tables[layer]
        for k in range(rows.stop - rows.start):
            out[rows.start + k] = _pooled(seq[k], encoded.mask[rows][k], applied)


def extract_all(
    params: rnn.ModelParams,
    encoded,
    policy: str = "last",
    checkpoint_hash: str = "",
    chunk_size: int = 128,
) -> dict[LayerId, ActivationTable]:
    """Representation tables for all four layers, row-aligned with the corpus."""
    if policy not in POOLING_POLICIES:
        raise ValueError(f"unknown pooling policy {policy!r}")
    if encoded.vocab.size != params.config.vocab_size:
        raise VocabMismatch(
            f"corpus vocabulary has {encoded.vocab.size} ids but the "
            f"model expects {params.config.vocab_size}"
        )
    n = encoded.tokens.shape[0]
    c = params.config
    dims = {
        LayerId.Embedding: c.embedding_dim,
        LayerId.Lstm1: c.hidden1,
        LayerId.Lstm2: c.hidden2,
        LayerId.Output: c.vocab_size,
    }
    tables = {layer: np.empty((n, d)) for layer, d in dims.items()}
    chunks = [slice(s, min(s + chunk_size, n)) for s in range(0, n, chunk_size)]
    workers = min(max_workers(), max(1, len(chunks)))
    if workers == 1 or len(chunks) <= 1:
        for rows in chunks:
            _extract_chunk(params, encoded, rows, policy, tables)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_extract_chunk, params, encoded, rows, policy, tables)
                for rows in chunks
            ]
            for f in futures:
                f.result()
    return {
        layer: ActivationTable(
            layer=layer,
            matrix=tables[layer],
            labels=encoded.labels.copy(),
            policy=layer_policy(layer, policy),
            checkpoint_hash=checkpoint_hash,
        )
        for layer in dims
    }


def save_table(path: str | Path, table: ActivationTable) -> None:
    """Binary container plus a sidecar JSON manifest next to it."""
    config = {
        "layer": int(table.layer),
        "layer_name": table.layer.name,
        "policy": table.policy,
        "checkpoint_hash": table.checkpoint_hash,
    }
    container.save_container(
        path,
        kind="activations",
        config=config,
        tensors={"matrix": table.matrix, "labels": table.labels},
    )
    values, counts = np.unique(table.labels, return_counts=True)
    sidecar = {
        **config,
        "n": int(table.matrix.shape[0]),
        "d": int(table.matrix.shape[1]),
        "label_histogram": {int(v): int(c) for v, c in zip(values, counts)},
        "file_sha256": container.file_sha256(path),
    }
    with open(str(path) + ".json", "w", encoding="utf-8", newline="\n") as f:
        json.dump(sidecar, f, indent=2, sort_keys=True)
        f.write("\n")


def load_table(path: str | Path) -> ActivationTable:
    config, tensors = container.load_container(path, expected_kind="activations")
    return ActivationTable(
        layer=LayerId(config["layer"]),
        matrix=tensors["matrix"],
        labels=tensors["labels"],
        policy=config["policy"],
        checkpoint_hash=config.get("checkpoint_hash", ""),
    )
