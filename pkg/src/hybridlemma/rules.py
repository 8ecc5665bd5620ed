"""Hand-written lemma corrections: casing, stray ``!``/``?``, number suffixes."""
from __future__ import annotations

import re
from dataclasses import dataclass

from .corpus import Token

PROPN = "PROPN"

# A numeric or date core: starts with a digit, then digits and . , : / – —;
# a hyphen belongs to the core only when a digit follows it.
NUMBER_CORE = r"\d(?:[\d.,:/–—]|-(?=\d))*"
NUMBER_WITH_SUFFIX = re.compile(rf"^({NUMBER_CORE})-[^\W\d_]+$")
_TRAILING_SEPARATORS = ".,:/–—-"


@dataclass(frozen=True)
class RuleConfig:
    enable_casing: bool = True
    enable_mark_strip: bool = True
    enable_number_trim: bool = True


def lower_first(text: str) -> str:
    """Lowercase the first character if it is uppercase."""
    if text and text[0].isupper():
        return text[0].lower() + text[1:]
    return text


def normalize_form(form: str, upos: str) -> str:
    """Prediction-time counterpart of :func:`case_normalize_training`."""
    return form if upos == PROPN else lower_first(form)


def case_normalize_training(form: str, lemma: str, upos: str,
                            is_sentence_initial: bool = False) -> tuple[str, str]:
    """Lowercase the first character of form and lemma unless the token is a PROPN.

    ``is_sentence_initial`` is accepted for symmetry with the token record;
    non-PROPN tokens are lowercased wherever they occur.
    """
    if upos == PROPN:
        return form, lemma
    return lower_first(form), lower_first(lemma)


def apply_casing(lemma: str, upos: str) -> str:
    return lemma if upos == PROPN else lower_first(lemma)


def strip_marks(token_form: str, lemma: str) -> str:
    """Remove ``!`` and ``?`` from the lemma unless nothing would be left."""
    stripped = lemma.replace("!", "").replace("?", "")
    return stripped or lemma


def trim_number_suffix(token_form: str, lemma: str) -> str:
    """For tokens like ``4-6-os`` return the numeric core (``4-6``) of the token.

    Keys on the token, not the lemma: predicted lemmas of such tokens are too
    irregular to repair directly.
    """
    m = NUMBER_WITH_SUFFIX.match(token_form)
    if m is None:
        return lemma
    return m.group(1).rstrip(_TRAILING_SEPARATORS)


def postprocess(token: Token, lemma: str, config: RuleConfig = RuleConfig()) -> str:
    # Marks are stripped before casing so a lemma like "!Alma" settles in one pass.
    if config.enable_mark_strip:
        lemma = strip_marks(token.form, lemma)
    if config.enable_casing:
        lemma = apply_casing(lemma, token.upos)
    if config.enable_number_trim:
        lemma = trim_number_suffix(token.form, lemma)
    return lemma
