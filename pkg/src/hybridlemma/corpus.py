"""CoNLL-U reading and writing.

Only FORM, LEMMA, UPOS and FEATS are modeled. Multiword-token ranges
(``1-2``) and empty nodes (``1.1``) are skipped on input; unmodeled
columns are written back as ``_``.

Format reference: https://universaldependencies.org/format.html
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Iterable, Optional, TextIO

Feats = tuple[tuple[str, str], ...]


class ConlluError(ValueError):
    """Malformed CoNLL-U input or unwritable corpus."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True, slots=True)
class Token:
    form: str
    upos: str
    feats: Feats = ()
    lemma: Optional[str] = None
    is_sentence_initial: bool = False

    def with_lemma(self, lemma: Optional[str]) -> "Token":
        return Token(self.form, self.upos, self.feats, lemma, self.is_sentence_initial)


@dataclass(frozen=True, slots=True)
class Sentence:
    tokens: tuple[Token, ...]
    comments: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def __getitem__(self, i: int) -> Token:
        return self.tokens[i]


@dataclass(frozen=True, slots=True)
class Corpus:
    sentences: tuple[Sentence, ...] = ()
    source_name: str = ""

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)

    @property
    def token_count(self) -> int:
        return sum(len(s) for s in self.sentences)

    def tokens(self) -> Iterable[Token]:
        for sentence in self.sentences:
            yield from sentence.tokens


def make_sentence(tokens: Iterable[Token], comments: Iterable[str] = ()) -> Sentence:
    """Build a sentence, setting ``is_sentence_initial`` on the first token only."""
    toks = tuple(tokens)
    if not toks:
        raise ValueError("a sentence needs at least one token")
    fixed = tuple(
        Token(t.form, t.upos, t.feats, t.lemma, i == 0) for i, t in enumerate(toks)
    )
    return Sentence(fixed, tuple(comments))


def parse_feats(text: str, line: Optional[int] = None) -> Feats:
    """Parse a FEATS column into a canonical, key-sorted tuple of pairs."""
    if text in ("", "_"):
        return ()
    pairs: dict[str, str] = {}
    for item in text.split("|"):
        key, sep, value = item.partition("=")
        if not sep or not key or not value:
            raise ConlluError(f"malformed feature {item!r}", line)
        if key in pairs and pairs[key] != value:
            raise ConlluError(f"conflicting values for feature {key!r}", line)
        pairs[key] = value
    return tuple(sorted(pairs.items()))


def format_feats(feats: Feats) -> str:
    if not feats:
        return "_"
    return "|".join(f"{k}={v}" for k, v in feats)


def parse_conllu(stream: TextIO | str, source_name: str = "") -> Corpus:
    """Parse CoNLL-U text (a stream or a string) into a :class:`Corpus`."""
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    sentences: list[Sentence] = []
    tokens: list[Token] = []
    comments: list[str] = []
    last_id = 0

    def flush() -> None:
        nonlocal tokens, comments, last_id
        # a comment block without words is dropped
        if tokens:
            sentences.append(make_sentence(tokens, comments))
        tokens, comments, last_id = [], [], 0

    lineno = 0
    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            flush()
            continue
        if line.startswith("#"):
            comments.append(line)
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise ConlluError(f"expected 10 tab-separated columns, got {len(cols)}", lineno)
        tid = cols[0]
        if "-" in tid or "." in tid:
            if not _valid_special_id(tid):
                raise ConlluError(f"malformed token id {tid!r}", lineno)
            continue
        if not tid.isdigit():
            raise ConlluError(f"malformed token id {tid!r}", lineno)
        num = int(tid)
        if num != last_id + 1:
            raise ConlluError(f"token id {num} does not follow {last_id}", lineno)
        last_id = num
        form, lemma, upos, feats = cols[1], cols[2], cols[3], cols[5]
        if not form:
            raise ConlluError("empty FORM", lineno)
        if lemma == "_" and form != "_":
            lemma_value: Optional[str] = None
        else:
            lemma_value = lemma or None
        tokens.append(Token(form, upos, parse_feats(feats, lineno), lemma_value))
    flush()
    return Corpus(tuple(sentences), source_name)


def _valid_special_id(tid: str) -> bool:
    sep = "-" if "-" in tid else "."
    a, _, b = tid.partition(sep)
    return a.isdigit() and b.isdigit()


def read_conllu(path: str) -> Corpus:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_conllu(fh, source_name=path)


def write_conllu(corpus: Corpus, sink: TextIO) -> None:
    """Write ``corpus`` as CoNLL-U. Every token must carry a lemma."""
    for si, sentence in enumerate(corpus.sentences):
        for ti, tok in enumerate(sentence.tokens):
            if tok.lemma is None:
                raise ConlluError(f"sentence {si}, token {ti} ({tok.form!r}) has no lemma")
    for sentence in corpus.sentences:
        for comment in sentence.comments:
            sink.write(comment + "\n")
        for i, tok in enumerate(sentence.tokens, start=1):
            cols = [str(i), tok.form, tok.lemma, tok.upos or "_", "_",
                    format_feats(tok.feats), "_", "_", "_", "_"]
            sink.write("\t".join(cols) + "\n")
        sink.write("\n")


def dumps_conllu(corpus: Corpus) -> str:
    buf = io.StringIO()
    write_conllu(corpus, buf)
    return buf.getvalue()
