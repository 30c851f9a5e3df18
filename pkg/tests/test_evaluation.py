import csv
import math

import numpy as np
import pytest

from emosa.corpus import EmotionLabel
from emosa.emotion import EmotionClassifier
from emosa.evaluation import (SWEEP_COLUMNS, EmbeddingTable, bleu_n, compute_report, distinct_n,
                              embedding_metrics, emotion_accuracy, write_sweep_csv)

import oracles


def s(text):
    return text.split()


class TestBleu:
    def test_identity(self):
        c = [s("a b c"), s("d e")]
        assert bleu_n(c, c, 1) == pytest.approx(100.0)
        assert bleu_n(c, c, 2) == pytest.approx(100.0)

    def test_disjoint(self):
        assert bleu_n([s("a b")], [s("c d")], 1) == 0.0

    def test_one_substitution_unigram(self):
        assert bleu_n([s("a b c")], [s("a b d")], 1) == pytest.approx(66.67, abs=0.01)

    def test_bigram_hand_case(self):
        # p1 = 3/4, p2 = 2/3, equal lengths
        assert bleu_n([s("a b c d")], [s("a b c e")], 2) == pytest.approx(100 * math.sqrt(0.5), rel=1e-12)

    def test_clipping(self):
        assert bleu_n([s("a a a")], [s("a b c")], 1) == pytest.approx(100 / 3)

    def test_brevity_penalty(self):
        assert bleu_n([s("a b")], [s("a b c d")], 2) == pytest.approx(100 * math.exp(-1), rel=1e-12)

    def test_no_bigram_match_is_zero(self):
        assert bleu_n([s("a")], [s("a")], 2) == 0.0

    def test_corpus_level_pooling(self):
        # pooled p1 = (1 + 2) / (2 + 2)
        got = bleu_n([s("a x"), s("b c")], [s("a y"), s("b c")], 1)
        assert got == pytest.approx(75.0)

    def test_errors(self):
        with pytest.raises(ValueError):
            bleu_n([], [], 1)
        with pytest.raises(ValueError):
            bleu_n([s("a")], [], 1)


class TestDistinct:
    def test_hand(self):
        assert distinct_n([s("a a b")], 1) == pytest.approx(2 / 3)
        assert distinct_n([s("x")] * 5, 1) == pytest.approx(1 / 5)
        assert distinct_n([s("x")], 2) == 0.0

    def test_matches_enumeration(self):
        rng = np.random.default_rng(0)
        outs = [list(rng.choice(list("abcde"), rng.integers(1, 6))) for _ in range(10)]
        for n in (1, 2):
            assert distinct_n(outs, n) == oracles.distinct(outs, n)
            assert distinct_n(outs[::-1], n) == distinct_n(outs, n)


class TestEmotionAccuracy:
    def test_degenerate_judge_picks_first_label(self):
        judge = EmotionClassifier(np.zeros((6, 5)), np.zeros(6))
        targets = [EmotionLabel.HAPPY, EmotionLabel.SAD, EmotionLabel.HAPPY, EmotionLabel.LIKE]
        assert emotion_accuracy(judge, [()] * 4, targets) == 0.5

    def test_permutation_invariant(self):
        counts = np.ones((6, 6))
        counts[EmotionLabel.SAD, 4] = 50
        counts[EmotionLabel.LIKE, 5] = 50
        judge = EmotionClassifier(counts, np.ones(6))
        outs = [(4,), (5,), (4, 4), (5,)]
        tg = ["sad", "like", "like", "sad"]
        assert emotion_accuracy(judge, outs, tg) == 0.5
        assert emotion_accuracy(judge, outs[::-1], tg[::-1]) == 0.5

    def test_length_mismatch(self):
        judge = EmotionClassifier(np.zeros((6, 5)), np.ones(6))
        with pytest.raises(ValueError):
            emotion_accuracy(judge, [(4,)], [])


def _table():
    return EmbeddingTable({"a": np.array([1.0, 0.0]), "b": np.array([0.0, 1.0]),
                           "c": np.array([1.0, 1.0]), "d": np.array([-2.0, 0.5])})


class TestEmbeddings:
    def test_identity(self):
        c = [s("a b"), s("c d a")]
        e = embedding_metrics(_table(), c, c, c)
        for v in (e.average, e.greedy, e.extreme, e.coherence):
            assert v == pytest.approx(1.0, abs=1e-6)

    def test_orthogonal(self):
        e = embedding_metrics(_table(), [["a"]], [["b"]], [["a"]])
        assert e.average == pytest.approx(0.0, abs=1e-12)

    def test_hand_two_word(self):
        # cand a b -> mean (.5,.5); ref c d -> mean (-.5,.75)
        e = embedding_metrics(_table(), [s("a b")], [s("c d")], [s("a")])
        assert e.average == pytest.approx((-0.25 + 0.375) / (math.sqrt(0.5) * math.sqrt(0.8125)))
        # greedy: a->max(cos(a,c)=.7071, cos(a,d)=-.9701); b->max(.7071, .2425); c->.7071; d->.2425
        r2 = 1 / math.sqrt(2)
        cd = 0.5 / math.sqrt(4.25)
        assert e.greedy == pytest.approx(0.5 * ((r2 + r2) / 2 + (r2 + cd) / 2))
        # extreme: cand (1,1); ref dims: max |.| -> (-2, 1)
        assert e.extreme == pytest.approx((-2 + 1) / (math.sqrt(2) * math.sqrt(5)))
        assert e.coherence == pytest.approx(r2)

    def test_rotation_invariant(self):
        th = 0.7
        rot = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
        t = _table()
        rt = EmbeddingTable({w: rot @ v for w, v in t.vectors.items()})
        args = ([s("a b"), s("d")], [s("c d"), s("a c")], [s("b"), s("d a")])
        a, b = embedding_metrics(t, *args), embedding_metrics(rt, *args)
        np.testing.assert_allclose([a.average, a.greedy, a.coherence], [b.average, b.greedy, b.coherence],
                                   atol=1e-12)

    def test_oov_pairs_skipped(self):
        e = embedding_metrics(_table(), [s("zz"), s("a")], [s("a"), s("a")], [s("a"), s("a")])
        assert e.skipped == 1 and e.average == pytest.approx(1.0)
        e = embedding_metrics(_table(), [s("zz")], [s("a")], [s("a")])
        assert e.skipped == 1 and math.isnan(e.average)

    def test_load_text_format(self, tmp_path):
        p = tmp_path / "e.txt"
        p.write_text("2 3\nfoo 1 0 0\nbar 0 1 0.5\n", encoding="utf-8")
        t = EmbeddingTable.load(p)
        assert t.dim == 3 and set(t.vectors) == {"foo", "bar"}
        np.testing.assert_array_equal(t.vectors["bar"], [0, 1, 0.5])

    def test_mixed_dimensions(self):
        with pytest.raises(ValueError):
            EmbeddingTable({"a": np.zeros(2), "b": np.zeros(3)})


class TestReport:
    def test_fields_in_range(self):
        judge = EmotionClassifier(np.ones((6, 8)), np.ones(6))
        outs, refs = [(4, 5), (6,)], [(4, 5), (7,)]
        rep = compute_report(outs, refs, ["happy", "sad"], judge)
        assert 0 <= rep.bleu2 <= 100 and 0 <= rep.dist1 <= 1 and rep.emotion_accuracy == 0.5
        assert rep.n == 2 and rep.average is None
        assert '"bleu1"' in rep.to_json()

    def test_sweep_csv_columns(self, tmp_path):
        rows = [dict(alpha=0.0, bleu1=1.0, bleu2=2.0, dist1=0.1, dist2=0.2, emotion_accuracy=0.3)]
        write_sweep_csv(rows, tmp_path / "s.csv")
        with open(tmp_path / "s.csv") as fh:
            got = list(csv.DictReader(fh))
        assert tuple(got[0]) == SWEEP_COLUMNS and float(got[0]["bleu2"]) == 2.0
