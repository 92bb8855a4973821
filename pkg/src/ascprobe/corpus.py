"""Corpus generation, tokenization, vocabulary, encoding, and splitting.

Four construction classes, one template each:

    transitive     subject verb object
    ditransitive   subject verb recipient object
    caused_motion  subject verb object path
    resultative    subject verb object result_state

Generation samples uniformly without replacement from the slot-combination
space of each class via a seeded shuffle of combination indices, so corpora
are balanced, duplicate-free, and byte-identical for identical
(spec, seed, n_per_class).
"""

from __future__ import annotations

import json
import math
import random
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import default_grammar
from .errors import DegenerateSplit, EmptyCorpus, InsufficientCombinations

CLASSES = ("transitive", "ditransitive", "caused_motion", "resultative")

TEMPLATES = {
    "transitive": ("subject", "verb", "object"),
    "ditransitive": ("subject", "verb", "recipient", "object"),
    "caused_motion": ("subject", "verb", "object", "path"),
    "resultative": ("subject", "verb", "object", "result_state"),
}

PAD_ID = 0
UNK_ID = 1

_FILLER_RE = re.compile(r"^[a-z]+( [a-z]+)*$")


@dataclass
class GrammarSpec:
    """Slot lists plus per-class templates; determiners live inside fillers."""

    subjects: list[str]
    objects: list[str]
    recipients: list[str]
    paths: list[str]
    result_states: list[str]
    verbs: dict[str, list[str]]
    templates: dict[str, tuple[str, ...]] = field(
        default_factory=lambda: dict(TEMPLATES)
    )
    determiner_policy: str = "embedded"
    shared_verbs: list[str] = field(default_factory=list)

    def slot_list(self, cls: str, slot: str) -> list[str]:
        if slot == "verb":
            return self.verbs[cls]
        return {
            "subject": self.subjects,
            "object": self.objects,
            "recipient": self.recipients,
            "path": self.paths,
            "result_state": self.result_states,
        }[slot]

    def validate(self) -> None:
        if self.determiner_policy != "embedded":
            raise ValueError(
                f"unsupported determiner policy {self.determiner_policy!r}"
            )
        if set(self.verbs) != set(CLASSES):
            raise ValueError(f"verb lists must cover exactly the classes {CLASSES}")
        if set(self.templates) != set(CLASSES):
            raise ValueError(f"templates must cover exactly the classes {CLASSES}")
        for cls in CLASSES:
            if tuple(self.templates[cls]) != TEMPLATES[cls]:
                raise ValueError(
                    f"template for {cls} must be {TEMPLATES[cls]}, "
                    f"got {tuple(self.templates[cls])}"
                )
            for slot in TEMPLATES[cls]:
                fillers = self.slot_list(cls, slot)
                if not fillers:
                    raise ValueError(f"empty slot list {slot!r} for class {cls}")
                if len(set(fillers)) != len(fillers):
                    raise ValueError(f"duplicate fillers in slot {slot!r} ({cls})")
                for f in fillers:
                    if not _FILLER_RE.match(f):
                        raise ValueError(f"bad filler {f!r}: lowercase words only")
        # verb lists are class-specific unless explicitly shared
        shared = set(self.shared_verbs)
        for i, a in enumerate(CLASSES):
            for b in CLASSES[i + 1 :]:
                overlap = (set(self.verbs[a]) & set(self.verbs[b])) - shared
                if overlap:
                    raise ValueError(
                        f"verbs {sorted(overlap)} appear in both {a} and {b} "
                        "but are not listed in shared_verbs"
                    )

    def to_json_dict(self) -> dict:
        return {
            "determiner_policy": self.determiner_policy,
            "subjects": list(self.subjects),
            "objects": list(self.objects),
            "recipients": list(self.recipients),
            "paths": list(self.paths),
            "result_states": list(self.result_states),
            "verbs": {c: list(v) for c, v in self.verbs.items()},
            "templates": {c: list(t) for c, t in self.templates.items()},
            "shared_verbs": list(self.shared_verbs),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "GrammarSpec":
        spec = cls(
            subjects=list(d["subjects"]),
            objects=list(d["objects"]),
            recipients=list(d["recipients"]),
            paths=list(d["paths"]),
            result_states=list(d["result_states"]),
            verbs={c: list(v) for c, v in d["verbs"].items()},
            templates={c: tuple(t) for c, t in d.get("templates", TEMPLATES).items()},
            determiner_policy=d.get("determiner_policy", "embedded"),
            shared_verbs=list(d.get("shared_verbs", [])),
        )
        spec.validate()
        return spec


def default_spec() -> GrammarSpec:
    spec = GrammarSpec(
        subjects=list(default_grammar.SUBJECTS),
        objects=list(default_grammar.OBJECTS),
        recipients=list(default_grammar.RECIPIENTS),
        paths=list(default_grammar.PATHS),
        result_states=list(default_grammar.RESULT_STATES),
        verbs={c: list(v) for c, v in default_grammar.VERBS.items()},
    )
    spec.validate()
    return spec


@dataclass
class Corpus:
    """Tokenized sentences with class labels, in class-block order."""

    sentences: list[tuple[list[str], str]]
    seed: int | None = None

    @property
    def counts(self) -> dict[str, int]:
        c = {name: 0 for name in CLASSES}
        for _, label in self.sentences:
            c[label] += 1
        return c

    def __len__(self) -> int:
        return len(self.sentences)


def tokenize(text: str) -> list[str]:
    """Lowercase, strip terminal punctuation, split on whitespace."""
    return text.strip().rstrip(".!?").lower().split()


def display_text(words: list[str]) -> str:
    s = " ".join(words)
    return s[0].upper() + s[1:] + "."


def _unrank(index: int, sizes: list[int]) -> list[int]:
    # mixed-radix decode, last slot varies fastest
    digits = [0] * len(sizes)
    for j in range(len(sizes) - 1, -1, -1):
        digits[j] = index % sizes[j]
        index //= sizes[j]
    return digits


def generate_corpus(spec: GrammarSpec, seed: int, n_per_class: int) -> Corpus:
    """Balanced, duplicate-free corpus; pure function of (spec, seed, n_per_class)."""
    spec.validate()
    if n_per_class < 0:
        raise ValueError("n_per_class must be >= 0")
    rng = random.Random(seed)
    sentences: list[tuple[list[str], str]] = []
    for cls in CLASSES:
        slots = [spec.slot_list(cls, s) for s in TEMPLATES[cls]]
        sizes = [len(s) for s in slots]
        total = math.prod(sizes)
        if total < n_per_class:
            raise InsufficientCombinations(
                f"class {cls}: {total} slot combinations < {n_per_class} requested"
            )
        if n_per_class == 0:
            continue
        order = list(range(total))
        rng.shuffle(order)
        seen: set[tuple[str, ...]] = set()
        picked = 0
        for idx in order:
            digits = _unrank(idx, sizes)
            words: list[str] = []
            for slot_list, d in zip(slots, digits):
                words.extend(slot_list[d].split())
            key = tuple(words)
            if key in seen:
                continue  # distinct slot combos can collide as surface strings
            seen.add(key)
            sentences.append((words, cls))
            picked += 1
            if picked == n_per_class:
                break
        if picked < n_per_class:
            raise InsufficientCombinations(
                f"class {cls}: only {picked} distinct sentences realizable, "
                f"{n_per_class} requested"
            )
    return Corpus(sentences=sentences, seed=seed)


@dataclass
class Vocabulary:
    """Sorted word list; ids are word index + 2 (PAD=0, UNK=1 reserved)."""

    words: list[str]

    def __post_init__(self):
        if len(set(self.words)) != len(self.words):
            raise ValueError("duplicate words in vocabulary")
        if list(self.words) != sorted(self.words):
            raise ValueError("vocabulary words must be sorted")
        self.word_to_id = {w: i + 2 for i, w in enumerate(self.words)}

    @property
    def size(self) -> int:
        return len(self.words) + 2

    def id_of(self, word: str) -> int:
        return self.word_to_id.get(word, UNK_ID)

    def word_of(self, token_id: int) -> str:
        if token_id == PAD_ID:
            return "<pad>"
        if token_id == UNK_ID:
            return "<unk>"
        return self.words[token_id - 2]


def build_vocab(corpus: Corpus) -> Vocabulary:
    """Ids assigned by sorted word order, so the map is independent of sentence order."""
    if not corpus.sentences:
        raise EmptyCorpus("cannot build a vocabulary from an empty corpus")
    words = sorted({w for sent, _ in corpus.sentences for w in sent})
    return Vocabulary(words=words)


@dataclass
class EncodedCorpus:
    """Token-id matrix with mask, labels, and the vocabulary used to encode."""

    tokens: np.ndarray  # (N, T) int64
    mask: np.ndarray  # (N, T) bool, True = real token
    labels: np.ndarray  # (N,) int64, index into CLASSES
    vocab: Vocabulary
    t_max: int
    oov_count: int = 0

    @property
    def n(self) -> int:
        return self.tokens.shape[0]

    def lengths(self) -> np.ndarray:
        return self.mask.sum(axis=1)


def encode(corpus: Corpus, vocab: Vocabulary, padding: str = "post") -> EncodedCorpus:
    """Map words to ids and pad every row to the longest sentence.

    padding="post" (default) right-pads; "pre" left-pads, kept for
    sensitivity checks. OOV words encode as UNK and are tallied.
    """
    if padding not in ("post", "pre"):
        raise ValueError(f"padding must be 'post' or 'pre', got {padding!r}")
    n = len(corpus.sentences)
    t_max = max((len(s) for s, _ in corpus.sentences), default=0)
    tokens = np.full((n, t_max), PAD_ID, dtype=np.int64)
    mask = np.zeros((n, t_max), dtype=bool)
    labels = np.empty(n, dtype=np.int64)
    oov = 0
    for i, (words, cls) in enumerate(corpus.sentences):
        ids = []
        for w in words:
            tid = vocab.id_of(w)
            if tid == UNK_ID:
                oov += 1
            ids.append(tid)
        k = len(ids)
        sl = slice(0, k) if padding == "post" else slice(t_max - k, t_max)
        tokens[i, sl] = ids
        mask[i, sl] = True
        labels[i] = CLASSES.index(cls)
    return EncodedCorpus(
        tokens=tokens, mask=mask, labels=labels, vocab=vocab, t_max=t_max, oov_count=oov
    )


def decode_row(encoded: EncodedCorpus, row: int) -> list[str]:
    """Strip padding and map ids back to words ('<unk>' for UNK)."""
    ids = encoded.tokens[row][encoded.mask[row]]
    return [encoded.vocab.word_of(int(t)) for t in ids]


def split(
    encoded: EncodedCorpus, train_fraction: float, seed: int
) -> tuple[EncodedCorpus, EncodedCorpus]:
    """Stratified split; deterministic under seed; union = input, overlap empty."""
    if not (0.0 < train_fraction < 1.0):
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    rng = np.random.default_rng(seed)
    train_idx: list[np.ndarray] = []
    val_idx: list[np.ndarray] = []
    for c in np.unique(encoded.labels):
        idx = np.flatnonzero(encoded.labels == c)
        n_c = idx.size
        n_train = int(train_fraction * n_c + 0.5)
        if n_train == 0 or n_train == n_c:
            raise DegenerateSplit(
                f"class {CLASSES[int(c)]}: {n_c} sentences cannot be split "
                f"at fraction {train_fraction}"
            )
        perm = rng.permutation(n_c)
        train_idx.append(np.sort(idx[perm[:n_train]]))
        val_idx.append(np.sort(idx[perm[n_train:]]))

    def take(rows: np.ndarray) -> EncodedCorpus:
        return EncodedCorpus(
            tokens=encoded.tokens[rows].copy(),
            mask=encoded.mask[rows].copy(),
            labels=encoded.labels[rows].copy(),
            vocab=encoded.vocab,
            t_max=encoded.t_max,
            oov_count=0,
        )

    return take(np.concatenate(train_idx)), take(np.concatenate(val_idx))


# ---------------------------------------------------------------------------
# file formats

def save_corpus_jsonl(corpus: Corpus, path: str | Path) -> None:
    """One JSON object per line: {"text": ..., "label": ...}; UTF-8, LF."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for words, label in corpus.sentences:
            f.write(json.dumps({"text": display_text(words), "label": label},
                               ensure_ascii=False))
            f.write("\n")


def load_corpus_jsonl(path: str | Path) -> Corpus:
    sentences = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            obj = json.loads(line)
            label = obj["label"]
            if label not in CLASSES:
                raise ValueError(f"unknown class label {label!r} in {path}")
            sentences.append((tokenize(obj["text"]), label))
    return Corpus(sentences=sentences, seed=None)


def save_vocab(vocab: Vocabulary, path: str | Path) -> None:
    payload = {"pad_id": PAD_ID, "unk_id": UNK_ID, "words": list(vocab.words)}
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(payload, f, ensure_ascii=False, indent=2)
        f.write("\n")


def load_vocab(path: str | Path) -> Vocabulary:
    with open(path, encoding="utf-8") as f:
        payload = json.load(f)
    if payload.get("pad_id") != PAD_ID or payload.get("unk_id") != UNK_ID:
        raise ValueError(f"vocabulary file {path} has unexpected reserved ids")
    return Vocabulary(words=list(payload["words"]))


def save_grammar(spec: GrammarSpec, path: str | Path) -> None:
    # sorted keys make the file a canonical function of the grammar content
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(spec.to_json_dict(), f, ensure_ascii=False, indent=2, sort_keys=True)
        f.write("\n")


def load_grammar(path: str | Path) -> GrammarSpec:
    with open(path, encoding="utf-8") as f:
        return GrammarSpec.from_json_dict(json.load(f))
