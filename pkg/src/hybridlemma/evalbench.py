"""Lemma accuracy (CoNLL 2018 style, gold tokenization) and throughput timing."""
from __future__ import annotations

import gc
import time
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Callable

from .corpus import Corpus
from .pipeline import LemmatizerModel, lemmatize_corpus
from .selector import first_applicable

MAX_ERROR_SAMPLES = 50


class AlignmentError(ValueError):
    pass


@dataclass
class EvalReport:
    total_tokens: int
    correct: int
    accuracy: float
    per_upos_accuracy: dict[str, float]
    per_upos_total: dict[str, int]
    error_samples: list[tuple[str, str, str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["error_samples"] = [list(e) for e in self.error_samples]
        return d

    def format_table(self) -> str:
        lines = [f"{'UPOS':<8} {'tokens':>7} {'accuracy':>9}"]
        for upos in sorted(self.per_upos_total):
            lines.append(f"{upos:<8} {self.per_upos_total[upos]:>7} "
                         f"{100 * self.per_upos_accuracy[upos]:>8.2f}%")
        lines.append(f"{'ALL':<8} {self.total_tokens:>7} {100 * self.accuracy:>8.2f}%")
        return "\n".join(lines)


@dataclass
class BenchReport:
    tokens_per_second: float
    wall_seconds: float
    token_count: int
    runs: int
    best_of: int
    run_seconds: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def format_table(self) -> str:
        return (f"tokens: {self.token_count}\n"
                f"runs: {self.runs} (best of {self.best_of})\n"
                f"best wall time: {self.wall_seconds:.4f} s\n"
                f"throughput: {self.tokens_per_second:.0f} tokens/s")


def lemma_accuracy(gold: Corpus, predicted: Corpus) -> EvalReport:
    """Exact, case-sensitive lemma match over token-aligned corpora."""
    if len(gold) != len(predicted):
        raise AlignmentError(f"gold has {len(gold)} sentences, prediction has {len(predicted)}")
    for i, (g, p) in enumerate(zip(gold.sentences, predicted.sentences)):
        if len(g) != len(p):
            raise AlignmentError(f"sentence {i}: gold has {len(g)} tokens, prediction has {len(p)}")

    total, hits = Counter(), Counter()
    errors = []
    for g_sent, p_sent in zip(gold.sentences, predicted.sentences):
        for g, p in zip(g_sent.tokens, p_sent.tokens):
            total[g.upos] += 1
            if g.lemma == p.lemma:
                hits[g.upos] += 1
            elif len(errors) < MAX_ERROR_SAMPLES:
                errors.append((g.form, g.lemma or "", p.lemma or ""))
    n = sum(total.values())
    correct = sum(hits.values())
    return EvalReport(
        total_tokens=n,
        correct=correct,
        accuracy=correct / n if n else 0.0,
        per_upos_accuracy={u: hits[u] / c for u, c in sorted(total.items())},
        per_upos_total=dict(sorted(total.items())),
        error_samples=errors,
    )


def evaluate(model: LemmatizerModel, gold: Corpus, threads: int = 1, **options) -> EvalReport:
    """Lemmatize the gold corpus (using its tags) and score it."""
    return lemma_accuracy(gold, lemmatize_corpus(model, gold, threads=threads, **options))


def tree_coverage(model: LemmatizerModel, corpus: Corpus, top_k: int) -> float:
    """Fraction of tokens for which one of the ``top_k`` ranked trees applies."""
    covered = total = 0
    for sentence in corpus.sentences:
        for i in range(len(sentence)):
            total += 1
            covered += first_applicable(model.selector, sentence, i, top_k) is not None
    return covered / total if total else 0.0


def throughput_bench(model: LemmatizerModel, corpus: Corpus, runs: int = 3,
                     clock: Callable[[], float] = time.perf_counter,
                     threads: int = 1, **options) -> BenchReport:
    """Time end-to-end lemmatization; one untimed warm-up, then best of ``runs``."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    n = corpus.token_count
    if n == 0:
        raise ValueError("cannot benchmark on an empty corpus")
    lemmatize_corpus(model, corpus, threads=threads, **options)
    timings = []
    gc_was_enabled = gc.isenabled()
    gc.disable()
    try:
        for _ in range(runs):
            start = clock()
            lemmatize_corpus(model, corpus, threads=threads, **options)
            timings.append(clock() - start)
    finally:
        if gc_was_enabled:
            gc.enable()
    best = min(timings)
    return BenchReport(
        tokens_per_second=n / best if best > 0 else float("inf"),
        wall_seconds=best,
        token_count=n,
        runs=runs,
        best_of=runs,
        run_seconds=timings,
    )
