import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emosa.corpus import EmotionLabel
from emosa.emotion import emotion_log_posterior
from emosa.lm import conditional_logprob
from emosa.objective import Objective, ObjectiveConfig, score

from conftest import make_toy
import oracles


class TestScore:
    def test_decomposition(self, toy):
        x, y, e = (4, 6), (5, 7, 9), EmotionLabel.SAD
        sc = score(ObjectiveConfig(alpha=8.0), toy.scorer, toy.clf, x, e, y)
        assert sc.log_cond == conditional_logprob(toy.scorer, x, y)
        assert sc.log_emo == emotion_log_posterior(toy.clf, y)[e]
        assert sc.log_f == pytest.approx(sc.log_cond + 8 * sc.log_emo, rel=1e-15)

    def test_matches_oracles(self, toy):
        x, y = (4, 6), (5, 7, 9)
        lm = oracles.ngram_seq_logprob(toy.responses, toy.v, 3, 0.01, toy.scorer.ngram.lambdas, y)
        table, _ = oracles.ibm1_em([(p.post, p.response) for p in toy.pairs], toy.v, 3)
        tm = oracles.ibm1_seq_logprob(table, toy.v, 1e-4, x, y)
        emo = oracles.nb_log_posterior([(p.response, p.label) for p in toy.pairs], toy.v, 1.0, y)
        sc = score(ObjectiveConfig(alpha=2.5), toy.scorer, toy.clf, x, "like", y)
        assert sc.log_f == pytest.approx(0.7 * lm + 0.3 * tm + 2.5 * emo[EmotionLabel.LIKE], rel=1e-11)

    def test_alpha_zero_is_conditional(self, toy):
        sc = score(ObjectiveConfig(alpha=0.0), toy.scorer, toy.clf, (4,), "happy", (5, 6))
        assert sc.log_f == sc.log_cond

    def test_per_token(self, toy):
        y = (5, 6, 7, 8)
        raw = score(ObjectiveConfig(alpha=1.0), toy.scorer, toy.clf, (4,), "sad", y)
        per = score(ObjectiveConfig(alpha=1.0, score_mode="per_token"), toy.scorer, toy.clf, (4,), "sad", y)
        assert per.log_f == pytest.approx(raw.log_cond / 4 + raw.log_emo, rel=1e-14)

    def test_gamma_override(self, toy):
        a = score(ObjectiveConfig(gamma=0.0), toy.scorer, toy.clf, (4,), "sad", (5,))
        b = score(ObjectiveConfig(gamma=0.0), toy.scorer, toy.clf, (9,), "sad", (5,))
        assert a.log_cond == b.log_cond

    def test_rejects_empty_and_bad_config(self, toy):
        with pytest.raises(ValueError):
            score(ObjectiveConfig(), toy.scorer, toy.clf, (4,), "sad", ())
        with pytest.raises(ValueError):
            ObjectiveConfig(alpha=-1)
        with pytest.raises(ValueError):
            ObjectiveConfig(score_mode="mean")


class TestEditScores:
    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 50), data=st.data())
    def test_incremental_equals_full_rescore(self, seed, data):
        toy = make_toy(seed % 5, order=[1, 2, 3, 4][seed % 4])
        y = tuple(data.draw(st.lists(st.integers(4, toy.v - 1), min_size=1, max_size=6)))
        kind = data.draw(st.sampled_from(["replace", "insert"]))
        hi = len(y) - 1 if kind == "replace" else len(y)
        t = data.draw(st.integers(0, hi))
        mode = data.draw(st.sampled_from(["raw", "per_token"]))
        gamma = data.draw(st.sampled_from([0.0, 0.3, 1.0]))
        obj = Objective(ObjectiveConfig(3.0, mode, gamma), toy.scorer, toy.clf, (5, 6), "angry")
        cands = np.arange(4, toy.v)
        log_f, log_cond, log_emo = obj.edit_scores(y, t, kind, cands)
        for i, w in enumerate(cands.tolist()):
            new = y[:t] + (w,) + (y[t + 1:] if kind == "replace" else y[t:])
            full = obj.score(new)
            assert math.isclose(log_f[i], full.log_f, rel_tol=1e-11, abs_tol=1e-11)
            assert math.isclose(log_cond[i], full.log_cond, rel_tol=1e-11, abs_tol=1e-11)
            assert math.isclose(log_emo[i], full.log_emo, rel_tol=1e-11, abs_tol=1e-11)

    def test_position_checks(self, toy):
        obj = Objective(ObjectiveConfig(), toy.scorer, toy.clf, (4,), "sad")
        with pytest.raises(IndexError):
            obj.edit_scores((5, 6), 2, "replace", np.array([4]))
        with pytest.raises(IndexError):
            obj.edit_scores((5, 6), 3, "insert", np.array([4]))
        with pytest.raises(ValueError):
            obj.edit_scores((5, 6), 0, "delete", np.array([4]))
