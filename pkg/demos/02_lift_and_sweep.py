"""Emotion accuracy before and after annealing, then a sweep over alpha.

The held-out judge is a second naive Bayes classifier trained on a
separate split.  Expect the sweep to take about a minute.
"""
from emosa import Pipeline, SaConfig, train_models
from emosa.evaluation import SWEEP_COLUMNS, sweep_alpha
from emosa.synthetic import make_fixture

fx = make_fixture(seed=0)
models = train_models(fx.train, fx.judge)
pairs = [models.vocab.encode_pair(p) for p in fx.test]

bs_only, _ = Pipeline(models, sa=SaConfig(max_iters=0)).evaluate(pairs)
with_sa, _ = Pipeline(models).evaluate(pairs)
print(f"{'':10}{'BLEU-2':>8}{'Dist-2':>8}{'emo acc':>9}")
for name, rep in (("BS", bs_only), ("BS + SA", with_sa)):
    print(f"{name:10}{rep.bleu2:8.2f}{rep.dist2:8.3f}{rep.emotion_accuracy:9.3f}")

# Small weights leave the neutral reply alone, moderate ones add a single
# marker, very large ones stack markers and lose the topical words.
print()
print("  ".join(f"{c:>8}" for c in SWEEP_COLUMNS))
for row in sweep_alpha(Pipeline(models), pairs, [0, 1, 2, 4, 8, 16, 64]):
    print("  ".join(f"{row[c]:8.3f}" for c in SWEEP_COLUMNS))
