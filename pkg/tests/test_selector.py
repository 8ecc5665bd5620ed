from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from hybridlemma import edit_tree
from hybridlemma.corpus import Corpus, Token, make_sentence
from hybridlemma.edit_tree import TreeInventory
from hybridlemma.selector import (SelectorConfig, SelectorModel, extract_features,
                                  feature_strings, first_applicable, hash_feature,
                                  lemmatize_statistical, loss_and_grad, predict_topk,
                                  train_selector)

ADJ_SUP = (("Degree", "Sup"),)


def identity_corpus():
    s1 = [Token("a", "DET", (), "a"), Token("kutya", "NOUN", (), "kutya"), Token(".", "PUNCT", (), ".")]
    s2 = [Token("egy", "DET", (), "egy"), Token("ház", "NOUN", (), "ház"), Token("!", "PUNCT", (), "!")]
    return Corpus((make_sentence(s1), make_sentence(s2)))


def test_feature_templates_by_hand():
    sent = make_sentence([Token("leghosszabb", "ADJ", ADJ_SUP)])
    feats = feature_strings(sent, 0)
    for f in ["suffix1=b", "suffix3=abb", "suffix5=szabb", "prefix3=leg", "upos=ADJ",
              "prev_upos=<BOS>", "next_upos=<EOS>", "form=leghosszabb",
              "feat=Degree=Sup", "has_digit=0"]:
        assert f in feats
    idx = extract_features(sent, 0, 2 ** 12)
    assert hash_feature("suffix3=abb", 2 ** 12) in idx
    assert list(idx) == sorted(set(idx)) and idx.max() < 2 ** 12
    assert np.array_equal(idx, extract_features(sent, 0, 2 ** 12))


def test_features_use_case_normalized_form():
    sent = make_sentence([Token("Alma", "NOUN"), Token("Budapest", "PROPN")])
    assert "form=alma" in feature_strings(sent, 0)
    assert "form=Budapest" in feature_strings(sent, 1)


def test_feature_locality():
    left = [Token("a", "DET"), Token("házat", "NOUN")]
    a = make_sentence(left + [Token("látom", "VERB")])
    b = make_sentence(left + [Token("!", "PUNCT")])
    fa, fb = set(feature_strings(a, 1)), set(feature_strings(b, 1))
    assert {f.split("=")[0] for f in fa ^ fb} <= {"next_upos", "next_suffix1", "next_suffix2",
                                                   "next_suffix3"}
    assert fa != fb


def micro_instance(seed=0):
    rng = np.random.default_rng(seed)
    return rng.normal(size=(5, 3)), np.array([0, 2, 4]), 1


def test_gradient_matches_finite_differences():
    W, rows, label = micro_instance()
    _, g = loss_and_grad(W, rows, label)
    analytic = np.zeros_like(W)
    analytic[rows] = g
    eps = 1e-6
    numeric = np.zeros_like(W)
    for i in range(W.shape[0]):
        for j in range(W.shape[1]):
            Wp, Wm = W.copy(), W.copy()
            Wp[i, j] += eps
            Wm[i, j] -= eps
            numeric[i, j] = (loss_and_grad(Wp, rows, label)[0] - loss_and_grad(Wm, rows, label)[0]) / (2 * eps)
    denom = np.maximum(np.abs(analytic) + np.abs(numeric), 1e-12)
    rel = np.where(analytic == numeric, 0.0, np.abs(analytic - numeric) / denom)
    assert rel.max() <= 1e-4


def test_identity_corpus_fits():
    inv = TreeInventory()
    model = train_selector(identity_corpus(), inv, SelectorConfig(epochs=3))
    identity = inv.get_id(edit_tree.build("a", "a"))
    for sent in identity_corpus():
        for i in range(len(sent)):
            assert predict_topk(model, sent, i)[0][0] == identity


def test_training_reproducible(synth_train):
    cfg = SelectorConfig(epochs=2, seed=5)
    a = train_selector(synth_train, TreeInventory(), cfg)
    b = train_selector(synth_train, TreeInventory(), cfg)
    assert a.weights.tobytes() == b.weights.tobytes()
    c = train_selector(synth_train, TreeInventory(), SelectorConfig(epochs=2, seed=6))
    assert a.weights.tobytes() != c.weights.tobytes()


def test_min_tree_freq_prunes_rare_trees():
    corpus = Corpus((make_sentence([Token("házat", "NOUN", (), "ház"), Token("falat", "NOUN", (), "fal"),
                                    Token("leghosszabb", "ADJ", (), "hosszú")]),))
    inv = TreeInventory()
    model = train_selector(corpus, inv, SelectorConfig(min_tree_freq=2, epochs=1))
    rare = inv.get_id(edit_tree.build("leghosszabb", "hosszú"))
    assert rare not in model.labels
    assert list(model.labels) == [inv.get_id(edit_tree.build("házat", "ház"))]
    with pytest.raises(ValueError, match="min_tree_freq"):
        train_selector(corpus, TreeInventory(), SelectorConfig(min_tree_freq=5))


def test_empty_corpus_rejected():
    with pytest.raises(ValueError):
        train_selector(Corpus(), TreeInventory())


@pytest.mark.parametrize("kwargs", [dict(top_k=0), dict(feature_space_size=1000),
                                    dict(feature_space_size=512), dict(epochs=0),
                                    dict(learning_rate=0.0), dict(min_tree_freq=-1)])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        SelectorConfig(**kwargs)


def hand_model(top_k):
    """Two trees; the "-at" tree always outranks the "-et" tree."""
    inv = TreeInventory()
    at = inv.intern(edit_tree.build("házat", "ház"))
    et = inv.intern(edit_tree.build("kertet", "kert"))
    cfg = SelectorConfig(top_k=top_k, feature_space_size=2 ** 10)
    sent = make_sentence([Token("kertet", "NOUN")])
    fids = extract_features(sent, 0, cfg.feature_space_size)
    weights = np.tile(np.array([1.0, 0.5], dtype=np.float32), (len(fids), 1))
    return SelectorModel(inv, cfg, np.array([at, et]), fids, weights), sent, (at, et)


def test_fallback_to_second_candidate():
    model, sent, (at, et) = hand_model(top_k=2)
    ranked = predict_topk(model, sent, 0)
    assert [t for t, _ in ranked] == [at, et]
    assert ranked[0][1] > ranked[1][1]
    assert lemmatize_statistical(model, sent, 0) == "kert"


def test_give_up_returns_form():
    model, sent, _ = hand_model(top_k=1)
    assert len(predict_topk(model, sent, 0)) == 1
    assert lemmatize_statistical(model, sent, 0) == "kertet"
    capital = make_sentence([Token("Kertet", "NOUN")])
    assert lemmatize_statistical(model, capital, 0) == "kertet"


def test_ties_prefer_smaller_tree_id():
    model, sent, (at, et) = hand_model(top_k=2)
    flat = SelectorModel(model.inventory, model.config, model.labels, model.feature_ids,
                         np.zeros_like(model.weights))
    assert [t for t, _ in predict_topk(flat, sent, 0)] == [at, et]


def test_model_is_immutable(synth_model):
    with pytest.raises(ValueError):
        synth_model.selector.weights[0, 0] = 1.0


def test_monotone_coverage(synth_model):
    import synth
    corpus = synth.generate(60, seed=99, **synth.split_lexicon()["test"])
    sel = synth_model.selector
    covered = []
    for k in (1, 2, 3, 5, 8):
        covered.append({(si, i) for si, s in enumerate(corpus) for i in range(len(s))
                        if first_applicable(sel, s, i, k) is not None})
    for small, big in zip(covered, covered[1:]):
        assert small <= big


def test_thread_safe_prediction(synth_model, synth_train):
    sel = synth_model.selector
    jobs = [(s, i) for s in synth_train.sentences[:40] for i in range(len(s))]
    serial = [predict_topk(sel, s, i) for s, i in jobs]
    with ThreadPoolExecutor(max_workers=8) as pool:
        parallel = list(pool.map(lambda job: predict_topk(sel, *job), jobs))
    assert parallel == serial
