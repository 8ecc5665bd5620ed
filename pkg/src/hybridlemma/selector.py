"""Edit-tree selector: a hashed-feature softmax classifier over interned trees.

Features are (template, value) strings hashed with CRC-32 into a fixed space.
Only feature indices observed during training get a weight row, so memory
scales with the training vocabulary rather than with ``feature_space_size``.
"""
from __future__ import annotations

import logging
import zlib
from collections import Counter
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import edit_tree
from .corpus import Corpus, Sentence
from .edit_tree import TreeInventory
from .rules import case_normalize_training, normalize_form

log = logging.getLogger(__name__)

BOS = "<BOS>"
EOS = "<EOS>"


@dataclass(frozen=True)
class SelectorConfig:
    top_k: int = 3
    feature_space_size: int = 2 ** 20
    epochs: int = 10
    learning_rate: float = 0.1
    seed: int = 0
    min_tree_freq: int = 1

    def __post_init__(self):
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        fss = self.feature_space_size
        if fss < 2 ** 10 or fss & (fss - 1):
            raise ValueError("feature_space_size must be a power of two >= 1024")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.min_tree_freq < 0:
            raise ValueError("min_tree_freq must be >= 0")


def feature_strings(sentence: Sentence, position: int) -> list[str]:
    """The unhashed ``template=value`` features of one token, in template order."""
    tok = sentence.tokens[position]
    form = normalize_form(tok.form, tok.upos)
    feats = ["bias", f"form={form}", f"upos={tok.upos}"]
    feats.extend(f"suffix{n}={form[-n:]}" for n in range(1, 6))
    feats.extend(f"prefix{n}={form[:n]}" for n in range(1, 4))
    feats.extend(f"feat={k}={v}" for k, v in tok.feats)
    feats.append("has_digit=" + ("1" if any(c.isdecimal() for c in form) else "0"))
    for side, j, edge in (("prev", position - 1, BOS), ("next", position + 1, EOS)):
        if 0 <= j < len(sentence.tokens):
            other = sentence.tokens[j]
            oform = normalize_form(other.form, other.upos)
            feats.append(f"{side}_upos={other.upos}")
            feats.extend(f"{side}_suffix{n}={oform[-n:]}" for n in range(1, 4))
        else:
            feats.append(f"{side}_upos={edge}")
            feats.extend(f"{side}_suffix{n}={edge}" for n in range(1, 4))
    return feats


def hash_feature(feature: str, feature_space_size: int) -> int:
    return zlib.crc32(feature.encode("utf-8")) & (feature_space_size - 1)


def extract_features(sentence: Sentence, position: int,
                     feature_space_size: int = 2 ** 20) -> np.ndarray:
    """Sorted, deduplicated hashed feature indices (int64) for one token."""
    idx = {hash_feature(f, feature_space_size) for f in feature_strings(sentence, position)}
    return np.array(sorted(idx), dtype=np.int64)


def softmax(scores: np.ndarray) -> np.ndarray:
    z = np.exp(scores - scores.max())
    return z / z.sum()


def loss_and_grad(weights: np.ndarray, rows: np.ndarray, label: int) -> tuple[float, np.ndarray]:
    """Cross-entropy of one example and its gradient w.r.t. ``weights[rows]``.

    ``rows`` must be distinct. The gradient has shape ``(len(rows), n_classes)``;
    every active row receives the same ``softmax - onehot`` vector.
    """
    scores = weights[rows].sum(axis=0)
    p = softmax(scores)
    loss = -float(np.log(p[label]))
    p[label] -= 1.0
    return loss, np.broadcast_to(p, (len(rows), p.shape[0]))


class SelectorModel:
    """Frozen classifier. ``labels[c]`` is the tree id scored by column ``c``."""

    def __init__(self, inventory: TreeInventory, config: SelectorConfig,
                 labels: np.ndarray, feature_ids: np.ndarray, weights: np.ndarray):
        self.inventory = inventory
        self.config = config
        self.labels = np.ascontiguousarray(labels, dtype=np.int64)
        self.feature_ids = np.ascontiguousarray(feature_ids, dtype=np.int64)
        self.weights = np.ascontiguousarray(weights, dtype=np.float32)
        if self.weights.shape != (len(self.feature_ids), len(self.labels)):
            raise ValueError("weight matrix does not match label/feature counts")
        for arr in (self.labels, self.feature_ids, self.weights):
            arr.flags.writeable = False

    @property
    def n_classes(self) -> int:
        return len(self.labels)

    def rows(self, features: np.ndarray) -> np.ndarray:
        """Map hashed feature indices to weight rows, dropping unseen ones."""
        if len(self.feature_ids) == 0:
            return np.empty(0, dtype=np.int64)
        pos = np.searchsorted(self.feature_ids, features)
        pos[pos == len(self.feature_ids)] = 0
        return pos[self.feature_ids[pos] == features]

    def scores(self, sentence: Sentence, position: int) -> np.ndarray:
        feats = extract_features(sentence, position, self.config.feature_space_size)
        return self.weights[self.rows(feats)].sum(axis=0, dtype=np.float32)


def _ranked(model: SelectorModel, scores: np.ndarray, k: int) -> list[tuple[int, float]]:
    # labels are ascending, so a stable sort breaks ties toward the smaller tree id
    order = np.argsort(-scores, kind="stable")[:k]
    return [(int(model.labels[c]), float(scores[c])) for c in order]


def predict_topk(model: SelectorModel, sentence: Sentence, position: int,
                 top_k: Optional[int] = None) -> list[tuple[int, float]]:
    """The ``top_k`` best (tree_id, score) pairs, best first."""
    k = model.config.top_k if top_k is None else top_k
    return _ranked(model, model.scores(sentence, position), k)


def first_applicable(model: SelectorModel, sentence: Sentence, position: int,
                     top_k: Optional[int] = None) -> Optional[str]:
    """Output of the best-ranked tree within ``top_k`` that fits the form, if any."""
    tok = sentence.tokens[position]
    form = normalize_form(tok.form, tok.upos)
    for tree_id, _ in predict_topk(model, sentence, position, top_k):
        lemma = edit_tree.apply(model.inventory[tree_id], form)
        if lemma:
            return lemma
    return None


def lemmatize_statistical(model: SelectorModel, sentence: Sentence, position: int,
                          top_k: Optional[int] = None) -> str:
    """Try the ranked trees in order; give up with the case-normalized form."""
    lemma = first_applicable(model, sentence, position, top_k)
    if lemma is None:
        tok = sentence.tokens[position]
        return normalize_form(tok.form, tok.upos)
    return lemma


def train_selector(corpus: Corpus, inventory: TreeInventory,
                   config: SelectorConfig = SelectorConfig()) -> SelectorModel:
    if corpus.token_count == 0:
        raise ValueError("cannot train a selector on an empty corpus")

    examples: list[tuple[np.ndarray, int]] = []
    for sentence in corpus.sentences:
        for i, tok in enumerate(sentence.tokens):
            if not tok.lemma:
                raise ValueError(f"token {tok.form!r} has no gold lemma")
            form, lemma = case_normalize_training(tok.form, tok.lemma, tok.upos,
                                                  tok.is_sentence_initial)
            tree = edit_tree.build(form, lemma)
            tree_id = inventory.ensure(tree)
            examples.append((extract_features(sentence, i, config.feature_space_size), tree_id))

    label_freq = Counter(tree_id for _, tree_id in examples)
    threshold = max(config.min_tree_freq, 1)
    labels = np.array(sorted(t for t, n in label_freq.items() if n >= threshold), dtype=np.int64)
    if len(labels) == 0:
        raise ValueError("every edit tree fell below min_tree_freq; nothing to learn")
    column = {int(t): c for c, t in enumerate(labels)}
    examples = [(f, column[t]) for f, t in examples if t in column]

    feature_ids = np.unique(np.concatenate([f for f, _ in examples]))
    X = [np.searchsorted(feature_ids, f) for f, _ in examples]
    y = np.array([c for _, c in examples], dtype=np.int64)
    log.info("selector: %d examples, %d trees, %d features",
             len(y), len(labels), len(feature_ids))

    W = np.zeros((len(feature_ids), len(labels)), dtype=np.float32)
    rng = np.random.default_rng(config.seed)
    for epoch in range(config.epochs):
        lr = np.float32(config.learning_rate / (1.0 + epoch))
        total = 0.0
        for i in rng.permutation(len(y)):
            rows = X[i]
            loss, grad = loss_and_grad(W, rows, y[i])
            W[rows] -= lr * grad
            total += loss
        log.info("epoch %d: mean loss %.4f", epoch + 1, total / len(y))

    return SelectorModel(inventory, config, labels, feature_ids, W)
