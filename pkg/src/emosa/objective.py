"""Search objective: log f(y) = log P(y|x) + alpha * log P_emo(e|y)."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .corpus import BOS, EOS, EmotionLabel
from .emotion import EmotionClassifier, emotion_log_posterior
from .lm import ConditionalScorer, conditional_logprob

SCORE_MODES = ("raw", "per_token")


@dataclass(frozen=True)
class ObjectiveConfig:
    alpha: float = 8.0
    score_mode: str = "raw"
    # overrides the scorer's mixture weight when set
    gamma: float | None = None

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if self.score_mode not in SCORE_MODES:
            raise ValueError(f"score_mode must be one of {SCORE_MODES}")


@dataclass(frozen=True)
class ScoredCandidate:
    tokens: tuple[int, ...]
    log_f: float
    log_cond: float
    log_emo: float


class Objective:
    """The objective bound to one post ``x`` and target emotion ``e``.

    :meth:`score` rescores a whole sentence through the public scorer
    functions.  :meth:`edit_scores` scores every candidate word for a single
    replace/insert edit, recomputing only the n-gram windows, the Model 1
    term and the naive Bayes term touched by the edit.
    """

    def __init__(self, cfg: ObjectiveConfig, scorer: ConditionalScorer,
                 clf: EmotionClassifier, x: Sequence[int], e: EmotionLabel | str):
        if cfg.gamma is not None and cfg.gamma != scorer.gamma:
            scorer = replace(scorer, gamma=cfg.gamma)
        if clf.vocab_size != scorer.vocab_size:
            raise ValueError("classifier and scorer disagree on vocabulary size")
        self.cfg = cfg
        self.scorer = scorer
        self.clf = clf
        self.x = tuple(x)
        self.e = EmotionLabel.parse(e)
        self.ibm_vec = scorer.table.token_logprob_vector(self.x)

    @property
    def alpha(self) -> float:
        return self.cfg.alpha

    def combine(self, log_cond, log_emo, length):
        if self.cfg.score_mode == "per_token":
            log_cond = log_cond / length
        return log_cond + self.cfg.alpha * log_emo

    def score(self, y: Sequence[int]) -> ScoredCandidate:
        y = tuple(y)
        if not y:
            raise ValueError("objective is undefined for an empty response")
        log_cond = conditional_logprob(self.scorer, self.x, y)
        log_emo = float(emotion_log_posterior(self.clf, y)[self.e])
        return ScoredCandidate(y, float(self.combine(log_cond, log_emo, len(y))), log_cond, log_emo)

    def edit_scores(self, y: Sequence[int], t: int, kind: str,
                    candidates: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(log_f, log_cond, log_emo) arrays for putting each candidate at ``t``.

        ``kind="replace"`` overwrites ``y[t]`` (0 <= t < len(y));
        ``kind="insert"`` inserts before ``y[t]`` (0 <= t <= len(y)).
        """
        y = tuple(y)
        T = len(y)
        cands = np.asarray(candidates, dtype=np.int64)
        if kind == "replace":
            if not 0 <= t < T:
                raise IndexError(f"replace position {t} outside [0, {T})")
            new_len = T
        elif kind == "insert":
            if not 0 <= t <= T:
                raise IndexError(f"insert position {t} outside [0, {T}]")
            new_len = T + 1
        else:
            raise ValueError(f"unknown edit kind {kind!r}")

        g = self.scorer.gamma
        log_cond = np.zeros(len(cands))
        if g < 1:
            log_cond += (1 - g) * self._lm_edit(y, t, kind, cands)
        if g > 0:
            ibm = math.fsum(self.ibm_vec[list(y)])
            if kind == "replace":
                ibm -= self.ibm_vec[y[t]]
            log_cond += g * (ibm + self.ibm_vec[cands])

        ll = self.clf.log_likelihood
        base = self.clf.class_scores(y)
        if kind == "replace":
            base = base - ll[:, y[t]]
        scores = base[:, None] + ll[:, cands]
        log_emo = scores[self.e] - logsumexp(scores, axis=0)
        return self.combine(log_cond, log_emo, new_len), log_cond, log_emo

    def _lm_edit(self, y: tuple, t: int, kind: str, cands: np.ndarray) -> np.ndarray:
        lm = self.scorer.ngram
        n1 = lm.order - 1
        base = lm.token_logprobs(y)
        if kind == "replace":
            kept = math.fsum(base[:t] + base[t + n1 + 1:])
            right = y[t + 1:] + (EOS,)
        else:
            kept = math.fsum(base[:t] + base[t + n1:])
            right = y[t:] + (EOS,)
        left = (BOS,) * n1 + y[:t]
        out = np.log(lm.distribution(lm.context(y[:t]))[cands]) + kept
        prob = lm.prob
        for i in range(min(n1, len(right))):
            pre = left[len(left) - (n1 - 1 - i):]
            post = right[:i]
            target = right[i]
            out += np.log([prob(pre + (w,) + post, target) for w in cands.tolist()])
        return out


def score(cfg: ObjectiveConfig, scorer: ConditionalScorer, clf: EmotionClassifier,
          x: Sequence[int], e: EmotionLabel | str, y: Sequence[int]) -> ScoredCandidate:
    return Objective(cfg, scorer, clf, x, e).score(y)
