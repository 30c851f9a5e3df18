"""Beam search and diverse beam search over a :class:`ConditionalScorer`.

Hypotheses are scored by the raw cumulative mixture log-probability, the
same quantity as :func:`emosa.lm.conditional_logprob`; each step adds
``(1 - gamma) * log P_ngram(token | history) + gamma * ibm1 term`` and the
EOS step carries the n-gram term only.  Only non-reserved words and EOS are
ever emitted; EOS is not allowed as the first token.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import EOS, NUM_RESERVED
from .lm import ConditionalScorer


@dataclass(frozen=True)
class Hypothesis:
    tokens: tuple[int, ...]
    score: float
    finished: bool = True


@dataclass(frozen=True)
class DbsConfig:
    beam_size: int = 20
    groups: int = 20
    diversity: float = 0.5
    max_len: int = 20

    def __post_init__(self):
        if not 1 <= self.groups <= self.beam_size:
            raise ValueError("need 1 <= groups <= beam_size")
        if self.diversity < 0:
            raise ValueError("diversity strength must be nonnegative")
        if self.max_len < 1:
            raise ValueError("max_len must be >= 1")

    def group_widths(self) -> list[int]:
        q, r = divmod(self.beam_size, self.groups)
        return [q + (g < r) for g in range(self.groups)]


class _StepScorer:
    def __init__(self, scorer: ConditionalScorer, x: Sequence[int]):
        self.lm = scorer.ngram
        self.g = scorer.gamma
        v = scorer.vocab_size
        self.ibm = np.zeros(v)
        if self.g > 0:
            self.ibm = scorer.table.token_logprob_vector(x)
            self.ibm[EOS] = 0.0
        self.allowed = np.zeros(v, dtype=bool)
        self.allowed[NUM_RESERVED:] = True
        self.allowed[EOS] = True

    def __call__(self, prefix: tuple[int, ...]) -> np.ndarray:
        out = np.full(len(self.allowed), -np.inf)
        if self.g < 1:
            with np.errstate(divide="ignore"):
                lp = np.log(self.lm.distribution(self.lm.context(prefix)))
            out[self.allowed] = (1 - self.g) * lp[self.allowed]
        else:
            out[self.allowed] = 0.0
        if self.g > 0:
            out[self.allowed] += self.g * self.ibm[self.allowed]
        return out


class _Group:
    """One beam of fixed width with its pool of finished hypotheses."""

    def __init__(self, width: int, max_len: int):
        self.width = width
        self.max_len = max_len
        self.live: list[tuple[tuple[int, ...], float]] = [((), 0.0)]
        self.pool: list[Hypothesis] = []
        self.done = False

    def step(self, step_scorer: _StepScorer, penalty: np.ndarray | None) -> list[int]:
        """Advance one token; return the tokens chosen for the live beams."""
        length = len(self.live[0][0])
        rows = []
        for tokens, total in self.live:
            logp = step_scorer(tokens)
            if length >= 1:
                self.pool.append(Hypothesis(tokens, total + float(logp[EOS])))
            rows.append(total + logp)
        self.pool.sort(key=lambda h: -h.score)
        del self.pool[self.width:]

        chosen: list[int] = []
        if length < self.max_len:
            cand = np.vstack(rows)
            cand[:, EOS] = -np.inf
            ranked = cand if penalty is None else cand - penalty[None, :]
            flat = ranked.ravel()
            order = np.argsort(-flat, kind="stable")[: self.width]
            order = order[np.isfinite(flat[order])]
            v = cand.shape[1]
            new_live = []
            for idx in order.tolist():
                b, tok = divmod(idx, v)
                new_live.append((self.live[b][0] + (tok,), float(cand[b, tok])))
                chosen.append(tok)
            self.live = new_live
        else:
            self.live = []

        if not self.live:
            self.done = True
        elif len(self.pool) >= self.width:
            best_live = max(s for _, s in self.live)
            # extending a hypothesis never raises its score
            if self.pool[self.width - 1].score >= best_live:
                self.done = True
        return chosen


def _run(groups: list[_Group], step_scorer: _StepScorer, diversity: float) -> None:
    v = len(step_scorer.allowed)
    while not all(g.done for g in groups):
        seen = np.zeros(v)
        for g in groups:
            if g.done:
                continue
            penalty = diversity * seen if diversity > 0 and seen.any() else None
            for tok in g.step(step_scorer, penalty):
                seen[tok] += 1


def beam_search(scorer: ConditionalScorer, x: Sequence[int], beam_size: int = 20,
                max_len: int = 20) -> list[Hypothesis]:
    """Best-first beam search; returns up to ``beam_size`` finished hypotheses."""
    if beam_size < 1 or max_len < 1:
        raise ValueError("beam_size and max_len must be >= 1")
    group = _Group(beam_size, max_len)
    _run([group], _StepScorer(scorer, x), 0.0)
    return list(group.pool)


def diverse_beam_search(scorer: ConditionalScorer, x: Sequence[int],
                        cfg: DbsConfig = DbsConfig()) -> list[Hypothesis]:
    """Diverse beam search with a Hamming diversity penalty.

    The beam is split into ``cfg.groups`` groups advanced in lockstep.  When
    group ``g`` selects its next tokens, every candidate token is penalized
    by ``cfg.diversity`` times the number of times groups ``< g`` picked that
    token at the same step.  Penalties only steer selection; reported scores
    are the unpenalized log-probabilities.  Results of all groups are merged
    and sorted by score.
    """
    groups = [_Group(w, cfg.max_len) for w in cfg.group_widths()]
    _run(groups, _StepScorer(scorer, x), cfg.diversity)
    merged = [h for g in groups for h in g.pool]
    merged.sort(key=lambda h: -h.score)
    return merged


def initial_response(hyps: Sequence[Hypothesis]) -> tuple[int, ...]:
    """The globally best-scored hypothesis, used to seed the search."""
    if not hyps:
        raise ValueError("decoder produced no hypotheses")
    return max(hyps, key=lambda h: h.score).tokens
