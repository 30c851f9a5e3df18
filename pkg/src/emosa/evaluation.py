"""Corpus metrics: BLEU-n, Dist-n, emotion accuracy and embedding similarities."""
from __future__ import annotations

import csv
import json
import math
from collections import Counter
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Hashable, Iterable, Sequence

import numpy as np

from .corpus import EmotionLabel
from .emotion import EmotionClassifier, classify

if TYPE_CHECKING:
    from .pipeline import Pipeline


def _ngrams(tokens: Sequence[Hashable], n: int) -> list[tuple]:
    return [tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1)]


def bleu_n(candidates: Sequence[Sequence[Hashable]], references: Sequence[Sequence[Hashable]],
           n: int = 2) -> float:
    """Corpus BLEU with one reference per candidate, on a 0-100 scale.

    No smoothing: any k-gram order with zero matches gives 0.
    """
    if len(candidates) != len(references):
        raise ValueError("need exactly one reference per candidate")
    if not candidates:
        raise ValueError("BLEU of an empty corpus is undefined")
    if n < 1:
        raise ValueError("n must be >= 1")
    matches = [0] * n
    totals = [0] * n
    cand_len = ref_len = 0
    for cand, ref in zip(candidates, references):
        cand_len += len(cand)
        ref_len += len(ref)
        for k in range(1, n + 1):
            c = Counter(_ngrams(cand, k))
            r = Counter(_ngrams(ref, k))
            matches[k - 1] += sum(min(cnt, r[g]) for g, cnt in c.items())
            totals[k - 1] += max(len(cand) - k + 1, 0)
    if cand_len == 0 or min(matches) == 0:
        return 0.0
    log_p = sum(math.log(m / t) for m, t in zip(matches, totals)) / n
    bp = 1.0 if cand_len > ref_len else math.exp(1 - ref_len / cand_len)
    return 100.0 * bp * math.exp(log_p)


def distinct_n(outputs: Iterable[Sequence[Hashable]], n: int) -> float:
    """Unique n-grams over total n-grams, pooled across all outputs."""
    seen: set[tuple] = set()
    total = 0
    for out in outputs:
        grams = _ngrams(out, n)
        seen.update(grams)
        total += len(grams)
    return len(seen) / total if total else 0.0


def emotion_accuracy(judge: EmotionClassifier, outputs: Sequence[Sequence[int]],
                     targets: Sequence[EmotionLabel]) -> float:
    if len(outputs) != len(targets):
        raise ValueError("outputs and targets differ in length")
    if not outputs:
        return 0.0
    hits = sum(classify(judge, o) == EmotionLabel.parse(t) for o, t in zip(outputs, targets))
    return hits / len(outputs)


class EmbeddingTable:
    """Word vectors of a fixed dimension.  Words missing from the table are skipped."""

    def __init__(self, vectors: dict[str, np.ndarray]):
        if not vectors:
            raise ValueError("empty embedding table")
        dims = {len(v) for v in vectors.values()}
        if len(dims) != 1:
            raise ValueError("embedding vectors differ in dimension")
        self.dim = dims.pop()
        self.vectors = {w: np.asarray(v, dtype=np.float64) for w, v in vectors.items()}

    @classmethod
    def load(cls, path: str | Path) -> "EmbeddingTable":
        """Read ``word v1 ... vd`` lines; a leading ``count dim`` header is skipped."""
        vectors = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh):
                parts = line.rstrip().split(" ")
                if lineno == 0 and len(parts) == 2 and all(p.isdigit() for p in parts):
                    continue
                if len(parts) < 2:
                    continue
                vectors[parts[0]] = np.array([float(p) for p in parts[1:]])
        return cls(vectors)

    def matrix(self, words: Sequence[str]) -> np.ndarray:
        rows = [self.vectors[w] for w in words if w in self.vectors]
        return np.array(rows).reshape(len(rows), self.dim)


def _cos(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    return float(a @ b / (na * nb))


def _extrema(m: np.ndarray) -> np.ndarray:
    idx = np.abs(m).argmax(axis=0)
    return m[idx, np.arange(m.shape[1])]


def _greedy(a: np.ndarray, b: np.ndarray) -> float:
    an = a / np.maximum(np.linalg.norm(a, axis=1, keepdims=True), 1e-300)
    bn = b / np.maximum(np.linalg.norm(b, axis=1, keepdims=True), 1e-300)
    sim = an @ bn.T
    return 0.5 * (sim.max(axis=1).mean() + sim.max(axis=0).mean())


@dataclass
class EmbeddingScores:
    average: float
    greedy: float
    extreme: float
    coherence: float
    skipped: int


def embedding_metrics(table: EmbeddingTable, candidates: Sequence[Sequence[str]],
                      references: Sequence[Sequence[str]],
                      posts: Sequence[Sequence[str]]) -> EmbeddingScores:
    """Average / Greedy / Extreme against references, Coherence against posts.

    A pair is skipped (and counted) when the candidate, reference or post
    has no word in the table.
    """
    if not len(candidates) == len(references) == len(posts):
        raise ValueError("candidates, references and posts differ in length")
    avg, grd, ext, coh = [], [], [], []
    skipped = 0
    for cand, ref, post in zip(candidates, references, posts):
        c, r, p = table.matrix(cand), table.matrix(ref), table.matrix(post)
        if not (len(c) and len(r) and len(p)):
            skipped += 1
            continue
        avg.append(_cos(c.mean(axis=0), r.mean(axis=0)))
        grd.append(_greedy(c, r))
        ext.append(_cos(_extrema(c), _extrema(r)))
        coh.append(_cos(c.mean(axis=0), p.mean(axis=0)))
    if not avg:
        nan = float("nan")
        return EmbeddingScores(nan, nan, nan, nan, skipped)
    return EmbeddingScores(float(np.mean(avg)), float(np.mean(grd)), float(np.mean(ext)),
                           float(np.mean(coh)), skipped)


@dataclass
class MetricsReport:
    bleu1: float
    bleu2: float
    dist1: float
    dist2: float
    emotion_accuracy: float
    same_judge_accuracy: float | None = None
    average: float | None = None
    greedy: float | None = None
    extreme: float | None = None
    coherence: float | None = None
    embedding_skipped: int | None = None
    n: int = 0

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def compute_report(outputs: Sequence[Sequence[int]], references: Sequence[Sequence[int]],
                   targets: Sequence[EmotionLabel], judge: EmotionClassifier,
                   same_judge: EmotionClassifier | None = None,
                   embeddings: EmbeddingTable | None = None,
                   decode=None, posts: Sequence[Sequence[int]] | None = None) -> MetricsReport:
    """Bundle every metric for one set of outputs.

    ``decode`` maps id sequences to word sequences; it is needed only for
    the embedding metrics.
    """
    report = MetricsReport(
        bleu1=bleu_n(outputs, references, 1),
        bleu2=bleu_n(outputs, references, 2),
        dist1=distinct_n(outputs, 1),
        dist2=distinct_n(outputs, 2),
        emotion_accuracy=emotion_accuracy(judge, outputs, targets),
        n=len(outputs),
    )
    if same_judge is not None:
        report.same_judge_accuracy = emotion_accuracy(same_judge, outputs, targets)
    if embeddings is not None and decode is not None and posts is not None:
        emb = embedding_metrics(embeddings, [decode(o) for o in outputs],
                                [decode(r) for r in references], [decode(p) for p in posts])
        report.average, report.greedy, report.extreme, report.coherence = (
            emb.average, emb.greedy, emb.extreme, emb.coherence)
        report.embedding_skipped = emb.skipped
    return report


SWEEP_COLUMNS = ("alpha", "bleu1", "bleu2", "dist1", "dist2", "emotion_accuracy")


def sweep_alpha(pipeline: "Pipeline", pairs, alphas: Sequence[float]) -> list[dict]:
    """Run decode + anneal on ``pairs`` once per emotion weight.

    The initial decodes do not depend on the weight and are computed once.
    """
    initial = pipeline.initial_responses(pairs)
    rows = []
    for alpha in alphas:
        outputs = pipeline.anneal_all(pairs, initial, alpha=alpha)
        rep = pipeline.report(pairs, outputs)
        rows.append({"alpha": float(alpha), "bleu1": rep.bleu1, "bleu2": rep.bleu2,
                     "dist1": rep.dist1, "dist2": rep.dist2,
                     "emotion_accuracy": rep.emotion_accuracy})
    return rows


def write_sweep_csv(rows: Sequence[dict], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: repr(row[k]) if isinstance(row[k], float) else row[k]
                        for k in SWEEP_COLUMNS})
