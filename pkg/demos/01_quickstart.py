"""Train on the synthetic corpus and answer a few posts in every emotion.

Run with ``python demos/01_quickstart.py``.
"""
from emosa import EmotionLabel, Pipeline, initial_response, train_models
from emosa.corpus import detokenize
from emosa.synthetic import make_fixture

# A deterministic corpus: six topics, emotion markers such as "haha" or
# "sigh" inside otherwise topical replies, and mostly neutral training data.
fx = make_fixture(seed=0)
models = train_models(fx.train, fx.judge)
print(f"{len(fx.train)} training pairs, vocabulary of {len(models.vocab)} ids")

pipe = Pipeline(models)
for pair in fx.test[:3]:
    post = detokenize(pair.post)
    x = models.vocab.encode(pair.post)
    # beam search alone returns the most probable reply, which is neutral
    plain = initial_response(pipe.decode(x))
    print(f"\npost: {post}")
    print(f"  {'beam':>8}: {detokenize(models.vocab.decode(plain))}")
    # annealing edits that reply toward the requested emotion
    for emotion in EmotionLabel:
        text, _ = pipe.respond(post, emotion)
        print(f"  {str(emotion):>8}: {text}")
