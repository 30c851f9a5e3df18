"""End-to-end glue: train models, decode an initial response, anneal, evaluate."""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

from .anneal import SaConfig, SaTrace, make_rng, run_sa
from .corpus import DialoguePair, EmotionLabel, Vocabulary, build_vocabulary, detokenize, tokenize
from .decode import DbsConfig, beam_search, diverse_beam_search, initial_response
from .emotion import EmotionClassifier, train_emotion
from .evaluation import EmbeddingTable, MetricsReport, compute_report
from .lm import ConditionalScorer, NGramModel, TranslationTable, train_ibm1, train_ngram
from .objective import Objective, ObjectiveConfig, ScoredCandidate

logger = logging.getLogger(__name__)

MODEL_FILES = {
    "vocab": "vocab.tsv",
    "ngram": "ngram.txt",
    "ibm1": "ibm1.txt",
    "emotion": "emotion.txt",
    "judge": "judge.txt",
}


@dataclass
class Models:
    vocab: Vocabulary
    ngram: NGramModel
    table: TranslationTable
    clf: EmotionClassifier
    judge: EmotionClassifier | None = None

    def scorer(self, gamma: float = 0.3) -> ConditionalScorer:
        return ConditionalScorer(self.ngram, self.table, gamma)

    def save(self, outdir: str | Path) -> None:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        self.vocab.save(outdir / MODEL_FILES["vocab"])
        self.ngram.save(outdir / MODEL_FILES["ngram"])
        self.table.save(outdir / MODEL_FILES["ibm1"])
        self.clf.save(outdir / MODEL_FILES["emotion"])
        if self.judge is not None:
            self.judge.save(outdir / MODEL_FILES["judge"])

    @classmethod
    def load(cls, outdir: str | Path) -> "Models":
        outdir = Path(outdir)
        judge_path = outdir / MODEL_FILES["judge"]
        return cls(
            Vocabulary.load(outdir / MODEL_FILES["vocab"]),
            NGramModel.load(outdir / MODEL_FILES["ngram"]),
            TranslationTable.load(outdir / MODEL_FILES["ibm1"]),
            EmotionClassifier.load(outdir / MODEL_FILES["emotion"]),
            EmotionClassifier.load(judge_path) if judge_path.exists() else None,
        )


def train_models(train: Sequence[DialoguePair], judge_pairs: Sequence[DialoguePair] | None = None,
                 min_count: int = 2, order: int = 3, add_k: float = 0.01,
                 ibm_iters: int = 5, laplace: float = 1.0) -> Models:
    """Fit vocabulary, n-gram LM, Model 1 table and emotion classifier(s).

    ``train`` and ``judge_pairs`` hold string tokens.  The emotion
    classifiers learn from responses and their labels; a separate judge is
    trained only when ``judge_pairs`` is given.
    """
    vocab = build_vocabulary(train, min_count)
    enc = [vocab.encode_pair(p) for p in train]
    v = len(vocab)
    ngram = train_ngram([p.response for p in enc], v, order, add_k)
    table = train_ibm1(enc, v, ibm_iters)
    clf = train_emotion([(p.response, p.label) for p in enc], v, laplace)
    judge = None
    if judge_pairs:
        judge = train_emotion([(vocab.encode(p.response), p.label) for p in judge_pairs], v, laplace)
    return Models(vocab, ngram, table, clf, judge)


class Pipeline:
    """Decode-then-anneal response generation over trained :class:`Models`.

    Input ``index`` values select the per-input random stream, so outputs do
    not depend on the order in which inputs are processed.
    """

    def __init__(self, models: Models, objective: ObjectiveConfig = ObjectiveConfig(),
                 sa: SaConfig = SaConfig(), decoder: str = "bs", dbs: DbsConfig = DbsConfig(),
                 gamma: float = 0.3, embeddings: EmbeddingTable | None = None):
        if decoder not in ("bs", "dbs"):
            raise ValueError("decoder must be 'bs' or 'dbs'")
        self.models = models
        self.objective_cfg = objective
        self.sa_cfg = sa
        self.decoder = decoder
        self.dbs_cfg = dbs
        self.scorer = models.scorer(gamma if objective.gamma is None else objective.gamma)
        self.embeddings = embeddings

    @property
    def judge(self) -> EmotionClassifier:
        return self.models.judge if self.models.judge is not None else self.models.clf

    def decode(self, x: Sequence[int]):
        if self.decoder == "dbs":
            return diverse_beam_search(self.scorer, x, self.dbs_cfg)
        return beam_search(self.scorer, x, self.dbs_cfg.beam_size, self.dbs_cfg.max_len)

    def initial_responses(self, pairs: Sequence[DialoguePair]) -> list[tuple[int, ...]]:
        return [initial_response(self.decode(p.post)) for p in pairs]

    def anneal(self, x: Sequence[int], e: EmotionLabel, y0: Sequence[int], index: int = 0,
               alpha: float | None = None) -> tuple[ScoredCandidate, SaTrace]:
        cfg = self.objective_cfg if alpha is None else replace(self.objective_cfg, alpha=alpha)
        obj = Objective(cfg, self.scorer, self.models.clf, x, e)
        return run_sa(obj, y0, self.sa_cfg, make_rng(self.sa_cfg.seed, index))

    def anneal_all(self, pairs: Sequence[DialoguePair], initial: Sequence[Sequence[int]],
                   alpha: float | None = None) -> list[tuple[int, ...]]:
        return [self.anneal(p.post, p.label, y0, i, alpha)[0].tokens
                for i, (p, y0) in enumerate(zip(pairs, initial))]

    def respond_ids(self, x: Sequence[int], e: EmotionLabel, index: int = 0):
        y0 = initial_response(self.decode(x))
        return self.anneal(x, e, y0, index)

    def respond(self, text: str, emotion: str | EmotionLabel, index: int = 0) -> tuple[str, SaTrace]:
        e = EmotionLabel.parse(emotion)
        x = self.models.vocab.encode(tokenize(text))
        best, trace = self.respond_ids(x, e, index)
        return detokenize(self.models.vocab.decode(best.tokens)), trace

    def report(self, pairs: Sequence[DialoguePair], outputs: Sequence[Sequence[int]]) -> MetricsReport:
        same = self.models.clf if self.models.judge is not None else None
        return compute_report(outputs, [p.response for p in pairs], [p.label for p in pairs],
                              self.judge, same_judge=same, embeddings=self.embeddings,
                              decode=self.models.vocab.decode, posts=[p.post for p in pairs])

    def evaluate(self, pairs: Sequence[DialoguePair]) -> tuple[MetricsReport, list[tuple[int, ...]]]:
        """Metrics over id-encoded ``pairs``; also returns the outputs."""
        if not pairs:
            raise ValueError("empty test split")
        initial = self.initial_responses(pairs)
        outputs = self.anneal_all(pairs, initial) if self.sa_cfg.max_iters > 0 else initial
        return self.report(pairs, outputs), outputs
