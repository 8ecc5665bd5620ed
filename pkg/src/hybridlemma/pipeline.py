"""The three-stage lemmatizer: lookup, then edit-tree selection, then rules."""
from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

from . import __version__, edit_tree
from .archive import FORMAT_VERSION, dump_bytes, load_model, save_model  # noqa: F401
from .corpus import Corpus, Sentence, dumps_conllu
from .edit_tree import TreeInventory
from .lookup import LookupTable, lookup_apply, train_lookup
from .rules import RuleConfig, case_normalize_training, postprocess
from .selector import SelectorConfig, SelectorModel, lemmatize_statistical, train_selector


@dataclass
class LemmatizerModel:
    lookup: LookupTable
    selector: SelectorModel
    inventory: TreeInventory
    rules: RuleConfig
    format_version: int = FORMAT_VERSION
    training_metadata: str = ""


def _metadata(corpus: Corpus, config: SelectorConfig, rules: RuleConfig) -> str:
    digest = hashlib.sha256(dumps_conllu(corpus).encode("utf-8")).hexdigest()
    meta = {
        "corpus": corpus.source_name,
        "corpus_sha256": digest,
        "sentences": len(corpus),
        "tokens": corpus.token_count,
        "selector_config": vars(config),
        "rules": vars(rules),
        "trainer": f"hybridlemma {__version__}",
    }
    # wall-clock time would break byte-identical rebuilds
    if "SOURCE_DATE_EPOCH" in os.environ:
        meta["timestamp"] = int(os.environ["SOURCE_DATE_EPOCH"])
    return json.dumps(meta, sort_keys=True, ensure_ascii=False)


def train(corpus: Corpus, config: SelectorConfig = SelectorConfig(),
          rules: RuleConfig = RuleConfig()) -> LemmatizerModel:
    """Train lookup table and selector on the same case-normalized pairs."""
    if corpus.token_count == 0:
        raise ValueError("cannot train on an empty corpus")
    inventory = TreeInventory()
    for si, sentence in enumerate(corpus.sentences):
        for ti, tok in enumerate(sentence.tokens):
            if not tok.lemma:
                raise ValueError(f"sentence {si}, token {ti} ({tok.form!r}) has no gold lemma")
            form, lemma = case_normalize_training(tok.form, tok.lemma, tok.upos,
                                                  tok.is_sentence_initial)
            inventory.intern(edit_tree.build(form, lemma))
    table = train_lookup(corpus, inventory)
    selector = train_selector(corpus, inventory, config)
    return LemmatizerModel(table, selector, inventory, rules,
                           training_metadata=_metadata(corpus, config, rules))


def lemmatize(model: LemmatizerModel, sentence: Sentence, *, use_lookup: bool = True,
              top_k: Optional[int] = None, rules: Optional[RuleConfig] = None) -> list[str]:
    """One lemma per token.

    ``use_lookup``, ``top_k`` and ``rules`` override the trained setup for
    ablations; the defaults reproduce the model as trained.
    """
    rules = model.rules if rules is None else rules
    out = []
    for i, tok in enumerate(sentence.tokens):
        lemma = lookup_apply(model.lookup, tok) if use_lookup else None
        if lemma is None:
            lemma = lemmatize_statistical(model.selector, sentence, i, top_k)
        out.append(postprocess(tok, lemma, rules))
    return out


def lemmatize_corpus(model: LemmatizerModel, corpus: Corpus, threads: int = 1,
                     **options) -> Corpus:
    """Return a copy of ``corpus`` with predicted lemmas, sentence order preserved."""
    def run(sentence: Sentence) -> Sentence:
        lemmas = lemmatize(model, sentence, **options)
        return Sentence(tuple(t.with_lemma(l) for t, l in zip(sentence.tokens, lemmas)),
                        sentence.comments)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            sentences = tuple(pool.map(run, corpus.sentences))
    else:
        sentences = tuple(run(s) for s in corpus.sentences)
    return Corpus(sentences, corpus.source_name)
