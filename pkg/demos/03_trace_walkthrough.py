"""Follow one annealing run step by step and replay it from its trace."""
import tempfile
from pathlib import Path

from emosa import Pipeline, SaConfig, SaTrace, train_models
from emosa.cli import format_trace
from emosa.synthetic import make_fixture

fx = make_fixture(seed=0)
models = train_models(fx.train, fx.judge)
pair = models.vocab.encode_pair(fx.test[0])

# A warmer schedule than the default so that some downhill moves survive.
pipe = Pipeline(models, sa=SaConfig(tau_init=1.0, decay=0.05, max_iters=20))
best, trace = pipe.respond_ids(pair.post, "sad")
for line in format_trace(trace, models.vocab.decode):
    print(line)

# Traces are JSON lines; replaying the accepted edits rebuilds every state.
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "trace.jsonl"
    trace.dump(path)
    again = SaTrace.load(path)
assert again.states() == trace.states()
assert again.best_tokens() == best.tokens
print(f"\nreplayed {len(again.records)} steps; best log f = {best.log_f:.4f}")
