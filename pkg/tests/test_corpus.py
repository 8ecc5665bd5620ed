import io

import pytest
from hypothesis import given, strategies as st

from hybridlemma.corpus import (ConlluError, Corpus, Token, dumps_conllu, make_sentence,
                                parse_conllu, write_conllu)


def line(i, form, lemma="_", upos="NOUN", feats="_"):
    return "\t".join([str(i), form, lemma, upos, "_", feats, "_", "_", "_", "_"])


MINIMAL = "\n".join([line(1, "Alma", "alma"), line(2, ".", ".", "PUNCT"), ""]) + "\n"


def test_minimal_sentence():
    corpus = parse_conllu(MINIMAL)
    assert len(corpus) == 1
    sent = corpus.sentences[0]
    assert [t.form for t in sent] == ["Alma", "."]
    assert [t.lemma for t in sent] == ["alma", "."]
    assert sent[0].is_sentence_initial and not sent[1].is_sentence_initial


def test_feats_are_sorted():
    corpus = parse_conllu(line(1, "almát", "alma", feats="Number=Sing|Case=Acc") + "\n")
    assert corpus.sentences[0][0].feats == (("Case", "Acc"), ("Number", "Sing"))


def test_multiword_and_empty_nodes_skipped():
    text = "\n".join([
        "# text = vámonos",
        "1-2\tvámonos\t_\t_\t_\t_\t_\t_\t_\t_",
        line(1, "vamos", "ir", "VERB"),
        line(2, "nos", "nosotros", "PRON"),
        "2.1\tx\tx\tX\t_\t_\t_\t_\t_\t_",
        "",
    ])
    corpus = parse_conllu(text)
    assert [t.form for t in corpus.sentences[0]] == ["vamos", "nos"]


def test_underscore_lemma_is_absent_except_for_underscore_form():
    corpus = parse_conllu(line(1, "alma") + "\n" + line(2, "_", "_", "PUNCT") + "\n")
    toks = corpus.sentences[0].tokens
    assert toks[0].lemma is None
    assert toks[1].lemma == "_"


def test_windows_line_endings():
    corpus = parse_conllu(MINIMAL.replace("\n", "\r\n"))
    assert corpus.sentences[0][1].lemma == "."


def test_empty_input():
    assert parse_conllu("") == Corpus((), "")


@pytest.mark.parametrize("bad, lineno", [
    ("1\talma\talma\n", 1),
    (line(1, "a") + "\n" + line(3, "b") + "\n", 2),
    (line(1, "a") + "\n" + line(1, "b") + "\n", 2),
    ("x\ta\t_\t_\t_\t_\t_\t_\t_\t_\n", 1),
    (line(1, "a", feats="Case") + "\n", 1),
])
def test_malformed_lines_report_line_number(bad, lineno):
    with pytest.raises(ConlluError) as err:
        parse_conllu(bad)
    assert err.value.line == lineno


def test_ids_restart_per_sentence():
    text = MINIMAL + MINIMAL
    assert len(parse_conllu(text)) == 2


def test_roundtrip_and_empty_feats():
    corpus = parse_conllu(MINIMAL)
    text = dumps_conllu(corpus)
    assert text.splitlines()[0].split("\t")[5] == "_"
    assert parse_conllu(text) == corpus


def test_write_exact_columns():
    tok = Token("1000-ben", "NUM", (("Case", "Ine"),), "1000")
    out = dumps_conllu(Corpus((make_sentence([tok]),)))
    assert out == "1\t1000-ben\t1000\tNUM\t_\tCase=Ine\t_\t_\t_\t_\n\n"


def test_write_requires_lemmas():
    corpus = Corpus((make_sentence([Token("a", "DET", (), "a"), Token("b", "NOUN")]),))
    with pytest.raises(ConlluError, match="sentence 0, token 1"):
        write_conllu(corpus, io.StringIO())


def test_toy_fixture(toy_corpus):
    assert len(toy_corpus) == 4
    assert toy_corpus.token_count == 22
    assert all(sum(t.is_sentence_initial for t in s) == 1 for s in toy_corpus)
    assert parse_conllu(dumps_conllu(toy_corpus), toy_corpus.source_name) == toy_corpus


words = st.text(alphabet="aábcdeéfghiíoóöőuúüűAÁEÉ0123456789-.!?", min_size=1, max_size=12)
feat_pairs = st.dictionaries(st.sampled_from(["Case", "Number", "Person", "Tense"]),
                             st.sampled_from(["Nom", "Acc", "Sing", "Plur", "1", "3"]),
                             max_size=3)
tokens = st.builds(lambda f, l, u, fe: Token(f, u, tuple(sorted(fe.items())), l),
                   words, words, st.sampled_from(["NOUN", "VERB", "PROPN", "NUM"]), feat_pairs)


@given(st.lists(st.lists(tokens, min_size=1, max_size=6), max_size=4))
def test_roundtrip_property(sentences):
    corpus = Corpus(tuple(make_sentence(s) for s in sentences))
    text = dumps_conllu(corpus)
    again = parse_conllu(text)
    assert again == corpus
    assert parse_conllu(text) == again
