import pytest

from emosa.anneal import SaConfig
from emosa.corpus import LABELS, CorpusError, EmotionLabel
from emosa.decode import DbsConfig
from emosa.emotion import classify
from emosa.lm import conditional_logprob
from emosa.pipeline import Models, Pipeline, train_models
from emosa.synthetic import MARKERS, make_fixture


@pytest.fixture(scope="module")
def fx():
    return make_fixture(0)


@pytest.fixture(scope="module")
def models(fx):
    return train_models(fx.train, fx.judge)


@pytest.fixture(scope="module")
def test_pairs(fx, models):
    return [models.vocab.encode_pair(p) for p in fx.test]


class TestFixture:
    def test_deterministic(self, fx):
        again = make_fixture(0)
        assert again.train == fx.train and again.test == fx.test

    def test_shape(self, fx, models):
        assert len(fx.train) == 2000 and len(fx.judge) == 1000 and len(fx.test) == 200
        assert {p.label for p in fx.train} == set(LABELS)
        assert len(models.vocab) <= 3000

    def test_emotional_responses_carry_a_marker(self, fx):
        markers = {m for ms in MARKERS.values() for m in ms}
        for p in fx.train[:200]:
            has = any(w in markers for w in p.response)
            assert has == (p.label != EmotionLabel.NEUTRAL)

    def test_other_seed_differs(self, fx):
        assert make_fixture(1).train != fx.train


class TestModels:
    def test_save_load(self, models, tmp_path):
        models.save(tmp_path)
        back = Models.load(tmp_path)
        assert back.vocab == models.vocab
        x, y = (4, 5, 6), (7, 8)
        assert conditional_logprob(back.scorer(), x, y) == conditional_logprob(models.scorer(), x, y)
        assert back.judge is not None

    def test_without_judge(self, fx, tmp_path):
        m = train_models(fx.train[:300])
        m.save(tmp_path)
        assert Models.load(tmp_path).judge is None


class TestPipeline:
    def test_zero_iterations_is_beam_search(self, models, test_pairs):
        pipe = Pipeline(models, sa=SaConfig(max_iters=0))
        _, outputs = pipe.evaluate(test_pairs[:10])
        assert outputs == pipe.initial_responses(test_pairs[:10])

    def test_index_selects_stream(self, models, test_pairs):
        pipe = Pipeline(models)
        pairs = test_pairs[:6]
        init = pipe.initial_responses(pairs)
        batch = pipe.anneal_all(pairs, init)
        single = pipe.anneal(pairs[4].post, pairs[4].label, init[4], index=4)[0].tokens
        assert batch[4] == single

    def test_dbs_decoder(self, models, test_pairs):
        pipe = Pipeline(models, decoder="dbs", dbs=DbsConfig(beam_size=4, groups=2))
        assert len(pipe.decode(test_pairs[0].post)) == 4
        with pytest.raises(ValueError):
            Pipeline(models, decoder="greedy")

    def test_respond_text(self, models, fx):
        text, trace = Pipeline(models).respond(" ".join(fx.test[0].post), "sad")
        assert text and len(trace.records) == 50
        with pytest.raises(CorpusError):
            Pipeline(models).respond("hello", "joy")

    def test_empty_evaluation(self, models):
        with pytest.raises(ValueError):
            Pipeline(models).evaluate([])

    def test_target_happy_reaches_judge(self, models, test_pairs):
        pipe = Pipeline(models)
        hits = 0
        for i, p in enumerate(test_pairs):
            best, _ = pipe.respond_ids(p.post, EmotionLabel.HAPPY, index=i)
            hits += classify(models.judge, best.tokens) == EmotionLabel.HAPPY
        assert hits / len(test_pairs) > 0.9
