"""Dictionary lemmatizer keyed on (digit-masked form, UPOS, FEATS).

Each key stores the id of its most frequent edit tree rather than a literal
lemma, so a hit on ``0000-ben`` rewrites ``3000-ben`` into ``3000`` by copying
the token's own digits.
"""
from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import NamedTuple, Optional

from . import edit_tree
from .corpus import Corpus, Feats, Token
from .edit_tree import TreeInventory
from .rules import case_normalize_training, normalize_form


class LookupKey(NamedTuple):
    masked_form: str
    upos: str
    feats: Feats


@dataclass(frozen=True, slots=True)
class LookupEntry:
    tree_id: int
    count: int
    total: int


def mask_digits(text: str) -> str:
    """Replace every Unicode decimal digit with ``'0'``."""
    return "".join("0" if ch.isdecimal() else ch for ch in text)


def make_key(token: Token) -> LookupKey:
    return LookupKey(mask_digits(normalize_form(token.form, token.upos)), token.upos, token.feats)


class LookupTable:
    """Key -> winning tree; tree ids refer to the shared ``inventory``."""

    def __init__(self, inventory: TreeInventory,
                 entries: Optional[dict[LookupKey, LookupEntry]] = None):
        self.inventory = inventory
        self.entries: dict[LookupKey, LookupEntry] = dict(entries or {})

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, key: LookupKey) -> bool:
        return key in self.entries

    def get(self, key: LookupKey) -> Optional[LookupEntry]:
        return self.entries.get(key)

    def sorted_items(self) -> list[tuple[LookupKey, LookupEntry]]:
        return sorted(self.entries.items())


def train_lookup(corpus: Corpus, inventory: TreeInventory) -> LookupTable:
    counts: dict[LookupKey, Counter] = defaultdict(Counter)
    for si, sentence in enumerate(corpus.sentences):
        for ti, tok in enumerate(sentence.tokens):
            if not tok.lemma:
                raise ValueError(f"sentence {si}, token {ti} ({tok.form!r}) has no gold lemma")
            form, lemma = case_normalize_training(tok.form, tok.lemma, tok.upos,
                                                  tok.is_sentence_initial)
            tree = edit_tree.build(mask_digits(form), mask_digits(lemma))
            # Masked digits can land inside replace nodes (e.g. "10-11" -> "11");
            # such a tree no longer reproduces the real pair, so keep the exact one.
            if edit_tree.apply(tree, form) != lemma:
                tree = edit_tree.build(form, lemma)
            key = LookupKey(mask_digits(form), tok.upos, tok.feats)
            counts[key][inventory.ensure(tree)] += 1

    entries = {}
    for key, by_tree in counts.items():
        tree_id, count = min(by_tree.items(), key=lambda kv: (-kv[1], kv[0]))
        entries[key] = LookupEntry(tree_id, count, sum(by_tree.values()))
    return LookupTable(inventory, entries)


def lookup_apply(table: LookupTable, token: Token) -> Optional[str]:
    form = normalize_form(token.form, token.upos)
    entry = table.entries.get(LookupKey(mask_digits(form), token.upos, token.feats))
    if entry is None:
        return None
    # an empty rewrite is treated as a miss
    return edit_tree.apply(table.inventory[entry.tree_id], form) or None
