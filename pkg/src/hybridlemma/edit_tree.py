"""Edit trees: recursive form-to-lemma transformations.

A match node splits the form around the longest common substring it shares
with the lemma, copies that segment, and delegates the parts before and after
it to two subtrees. A replace node rewrites one literal segment into another.
Lengths are counted in Unicode code points.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Union


@dataclass(frozen=True, slots=True)
class ReplaceNode:
    source: str
    target: str


@dataclass(frozen=True, slots=True)
class MatchNode:
    prefix_len: int
    suffix_len: int
    left: "EditTree"
    right: "EditTree"


EditTree = Union[MatchNode, ReplaceNode]


def longest_common_substring(a: str, b: str) -> Optional[tuple[int, int, int]]:
    """Return ``(start_a, start_b, length)`` of the longest contiguous common segment.

    Ties go to the smallest ``start_a``, then the smallest ``start_b``.
    Returns None when the strings share no character.
    """
    if not a or not b:
        return None
    n = len(b)
    best_len = 0
    best_a = best_b = 0
    prev = [0] * (n + 1)
    for i in range(1, len(a) + 1):
        cur = [0] * (n + 1)
        ch = a[i - 1]
        for j in range(1, n + 1):
            if ch == b[j - 1]:
                run = prev[j - 1] + 1
                cur[j] = run
                if run >= best_len:
                    sa, sb = i - run, j - run
                    if run > best_len or (sa, sb) < (best_a, best_b):
                        best_len, best_a, best_b = run, sa, sb
        prev = cur
    if best_len == 0:
        return None
    return best_a, best_b, best_len


def _build(form: str, lemma: str) -> EditTree:
    lcs = longest_common_substring(form, lemma)
    if lcs is None:
        return ReplaceNode(form, lemma)
    sa, sb, length = lcs
    return MatchNode(
        prefix_len=sa,
        suffix_len=len(form) - sa - length,
        left=_build(form[:sa], lemma[:sb]),
        right=_build(form[sa + length:], lemma[sb + length:]),
    )


def build(form: str, lemma: str) -> EditTree:
    """Build the edit tree that rewrites ``form`` into ``lemma``."""
    if not form or not lemma:
        raise ValueError(f"cannot build an edit tree from {form!r} -> {lemma!r}: empty side")
    return _build(form, lemma)


def apply(tree: EditTree, form: str) -> Optional[str]:
    """Apply ``tree`` to ``form``; None when the tree does not fit the form."""
    if isinstance(tree, ReplaceNode):
        return tree.target if form == tree.source else None
    p, s = tree.prefix_len, tree.suffix_len
    n = len(form)
    if n < p + s:
        return None
    left = apply(tree.left, form[:p])
    if left is None:
        return None
    right = apply(tree.right, form[n - s:])
    if right is None:
        return None
    return left + form[p:n - s] + right


def depth(tree: EditTree) -> int:
    if isinstance(tree, ReplaceNode):
        return 1
    return 1 + max(depth(tree.left), depth(tree.right))


def format_tree(tree: EditTree) -> str:
    """Bracketed debug rendering, e.g. ``Match{3,3, Replace{"leg",""}, Replace{"abb","ú"}}``."""
    if isinstance(tree, ReplaceNode):
        src = json.dumps(tree.source, ensure_ascii=False)
        tgt = json.dumps(tree.target, ensure_ascii=False)
        return f"Replace{{{src},{tgt}}}"
    return (f"Match{{{tree.prefix_len},{tree.suffix_len}, "
            f"{format_tree(tree.left)}, {format_tree(tree.right)}}}")


class TreeInventory:
    """Interned edit trees with dense ids and occurrence counts.

    Training interns the tree of every (case-normalized) training pair once,
    so ``freq`` counts training occurrences. :meth:`ensure` registers extra
    trees (such as digit-masked lookup trees) without inflating counts.
    """

    def __init__(self):
        self.trees: list[EditTree] = []
        self.index: dict[EditTree, int] = {}
        self.freq: list[int] = []

    def __len__(self) -> int:
        return len(self.trees)

    def __getitem__(self, tree_id: int) -> EditTree:
        return self.trees[tree_id]

    def intern(self, tree: EditTree, count: int = 1) -> int:
        tree_id = self.index.get(tree)
        if tree_id is None:
            tree_id = len(self.trees)
            self.trees.append(tree)
            self.index[tree] = tree_id
            self.freq.append(0)
        self.freq[tree_id] += count
        return tree_id

    def ensure(self, tree: EditTree) -> int:
        """Id of ``tree``, interning it with count 1 only if it is new."""
        tree_id = self.index.get(tree)
        return self.intern(tree) if tree_id is None else tree_id

    def get_id(self, tree: EditTree) -> Optional[int]:
        return self.index.get(tree)
