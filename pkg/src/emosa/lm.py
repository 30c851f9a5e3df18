"""Conditional response scoring: interpolated add-k n-gram LM mixed with IBM Model 1.

The output space of both models is every vocabulary id except ``PAD`` and
``BOS``; ``EOS`` is predictable by the n-gram model only.  Probability
vectors are indexed by vocabulary id and carry exact zeros at ``PAD`` and
``BOS``.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import BOS, EOS, PAD, DialoguePair


def output_mask(vocab_size: int) -> np.ndarray:
    mask = np.ones(vocab_size, dtype=bool)
    mask[[PAD, BOS]] = False
    return mask


def default_lambdas(order: int) -> tuple[float, ...]:
    """Interpolation weights, lowest order first.

    The top order gets 0.6 and the rest is split evenly; a unigram model
    gets everything.
    """
    if order == 1:
        return (1.0,)
    rest = 0.4 / (order - 1)
    return tuple([rest] * (order - 1) + [0.6])


class NGramModel:
    """Interpolated add-k n-gram model over token ids.

    ``counts[k]`` maps a context tuple of length ``k`` to a dict of
    next-token counts; ``totals[k]`` holds the context totals.
    """

    def __init__(self, order: int, vocab_size: int, add_k: float,
                 lambdas: Sequence[float] | None = None):
        if order < 1:
            raise ValueError("order must be >= 1")
        if add_k <= 0:
            raise ValueError("add_k must be positive")
        self.order = order
        self.vocab_size = vocab_size
        self.add_k = float(add_k)
        self.lambdas = tuple(float(l) for l in (lambdas or default_lambdas(order)))
        if len(self.lambdas) != order or abs(sum(self.lambdas) - 1.0) > 1e-12:
            raise ValueError("need one interpolation weight per order, summing to 1")
        self.counts: list[dict[tuple, dict[int, int]]] = [{} for _ in range(order)]
        self.totals: list[dict[tuple, int]] = [{} for _ in range(order)]
        self.mask = output_mask(vocab_size)
        self.n_outputs = int(self.mask.sum())
        self._arrays: list[dict[tuple, tuple[np.ndarray, np.ndarray]]] = [{} for _ in range(order)]

    def add_sequence(self, ids: Sequence[int]) -> None:
        n = self.order
        padded = (BOS,) * (n - 1) + tuple(ids) + (EOS,)
        for i in range(n - 1, len(padded)):
            tok = padded[i]
            for k in range(n):
                ctx = padded[i - k:i]
                row = self.counts[k].setdefault(ctx, {})
                row[tok] = row.get(tok, 0) + 1
                self.totals[k][ctx] = self.totals[k].get(ctx, 0) + 1

    def freeze(self) -> None:
        self._arrays = [
            {ctx: (np.fromiter(row.keys(), dtype=np.int64, count=len(row)),
                   np.fromiter(row.values(), dtype=np.float64, count=len(row)))
             for ctx, row in table.items()}
            for table in self.counts
        ]

    def context(self, prefix: Sequence[int]) -> tuple[int, ...]:
        """The ``order - 1`` tokens conditioning the next prediction."""
        n = self.order - 1
        if n == 0:
            return ()
        ctx = tuple(prefix[-n:]) if prefix else ()
        if len(ctx) < n:
            ctx = (BOS,) * (n - len(ctx)) + ctx
        return ctx

    def prob(self, ctx: tuple[int, ...], tok: int) -> float:
        """P(tok | ctx) for a full-length context (see :meth:`context`)."""
        ak, denom_k = self.add_k, self.add_k * self.n_outputs
        p = 0.0
        n = self.order
        for k in range(n):
            sub = ctx[n - 1 - k:]
            row = self.counts[k].get(sub)
            if row is None:
                p += self.lambdas[k] / self.n_outputs
            else:
                p += self.lambdas[k] * (row.get(tok, 0) + ak) / (self.totals[k][sub] + denom_k)
        return p

    def distribution(self, ctx: tuple[int, ...]) -> np.ndarray:
        ak, denom_k = self.add_k, self.add_k * self.n_outputs
        n = self.order
        dist = np.zeros(self.vocab_size)
        base = 0.0
        for k in range(n):
            sub = ctx[n - 1 - k:]
            arrs = self._arrays[k].get(sub)
            if arrs is None:
                base += self.lambdas[k] / self.n_outputs
                continue
            denom = self.totals[k][sub] + denom_k
            base += self.lambdas[k] * ak / denom
            ids, cnt = arrs
            dist[ids] += (self.lambdas[k] / denom) * cnt
        dist += base
        dist[~self.mask] = 0.0
        return dist

    def token_logprobs(self, y: Sequence[int]) -> list[float]:
        """log P(y_i | history) for each token followed by the EOS term."""
        n1 = self.order - 1
        padded = (BOS,) * n1 + tuple(y) + (EOS,)
        return [math.log(self.prob(padded[i - n1:i], padded[i]))
                for i in range(n1, len(padded))]

    # serialization: header line, then "k<TAB>ctx ids<TAB>token<TAB>count" sorted
    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            lam = ",".join(repr(l) for l in self.lambdas)
            fh.write(f"#ngram order={self.order} vocab={self.vocab_size} "
                     f"add_k={self.add_k!r} lambdas={lam}\n")
            for k in range(self.order):
                for ctx in sorted(self.counts[k]):
                    row = self.counts[k][ctx]
                    c = " ".join(map(str, ctx))
                    for tok in sorted(row):
                        fh.write(f"{k}\t{c}\t{tok}\t{row[tok]}\n")

    @classmethod
    def load(cls, path: str | Path) -> "NGramModel":
        with open(path, encoding="utf-8") as fh:
            header = dict(kv.split("=", 1) for kv in fh.readline().split()[1:])
            model = cls(int(header["order"]), int(header["vocab"]), float(header["add_k"]),
                        [float(v) for v in header["lambdas"].split(",")])
            for line in fh:
                k, c, tok, cnt = line.rstrip("\n").split("\t")
                k = int(k)
                ctx = tuple(int(v) for v in c.split()) if c else ()
                model.counts[k].setdefault(ctx, {})[int(tok)] = int(cnt)
                model.totals[k][ctx] = model.totals[k].get(ctx, 0) + int(cnt)
        model.freeze()
        return model


def train_ngram(responses: Sequence[Sequence[int]], vocab_size: int, order: int = 3,
                add_k: float = 0.01, lambdas: Sequence[float] | None = None) -> NGramModel:
    if not responses:
        raise ValueError("cannot train an n-gram model on an empty corpus")
    model = NGramModel(order, vocab_size, add_k, lambdas)
    for y in responses:
        model.add_sequence(y)
    model.freeze()
    return model


def next_token_distribution(model: NGramModel, prefix: Sequence[int]) -> np.ndarray:
    """Next-token probabilities (indexed by id) after ``prefix``."""
    return model.distribution(model.context(prefix))


def sequence_logprob(model: NGramModel, y: Sequence[int]) -> float:
    """log P(y, EOS) under the n-gram model."""
    return math.fsum(model.token_logprobs(y))


@dataclass
class TranslationTable:
    """IBM Model 1 lexical table.

    ``probs[s, w]`` is tr(w | s) where row 0 is the NULL source token and
    row ``i + 1`` is source id ``i``.  ``floor`` mixes in a uniform
    distribution over the output space at scoring time so that tokens never
    seen in a response keep a finite score.
    """

    probs: np.ndarray
    iterations: int = 0
    loglik_history: list[float] = field(default_factory=list)
    floor: float = 1e-4

    @property
    def vocab_size(self) -> int:
        return self.probs.shape[1]

    @property
    def final_loglik(self) -> float:
        return self.loglik_history[-1] if self.loglik_history else float("nan")

    def rows(self, x: Sequence[int]) -> np.ndarray:
        return np.concatenate(([0], np.asarray(x, dtype=np.int64) + 1))

    def scoring_probs(self) -> np.ndarray:
        if not self.floor:
            return self.probs
        mask = output_mask(self.vocab_size)
        return (1 - self.floor) * self.probs + self.floor * mask / mask.sum()

    def token_logprob_vector(self, x: Sequence[int]) -> np.ndarray:
        """log[(1/(S+1)) sum_s tr(w | x_s)] for every output id w."""
        mean = self.scoring_probs()[self.rows(x)].mean(axis=0)
        with np.errstate(divide="ignore"):
            return np.log(mean)

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            hist = ",".join(repr(v) for v in self.loglik_history)
            fh.write(f"#ibm1 vocab={self.vocab_size} iterations={self.iterations} "
                     f"floor={self.floor!r} loglik={hist}\n")
            rows, cols = np.nonzero(self.probs)
            for r, c in zip(rows.tolist(), cols.tolist()):
                fh.write(f"{r}\t{c}\t{float(self.probs[r, c])!r}\n")

    @classmethod
    def load(cls, path: str | Path) -> "TranslationTable":
        with open(path, encoding="utf-8") as fh:
            header = dict(kv.split("=", 1) for kv in fh.readline().split()[1:])
            v = int(header["vocab"])
            probs = np.zeros((v + 1, v))
            for line in fh:
                r, c, p = line.split("\t")
                probs[int(r), int(c)] = float(p)
        hist = [float(s) for s in header["loglik"].split(",") if s]
        return cls(probs, int(header["iterations"]), hist, float(header["floor"]))


def _ibm1_pass(probs: np.ndarray, pairs: Sequence[DialoguePair],
               counts: np.ndarray | None) -> float:
    """One E-step; accumulates expected counts when ``counts`` is given.

    Returns the corpus log-likelihood under ``probs``.
    """
    ll = 0.0
    for pair in pairs:
        rows = np.concatenate(([0], np.asarray(pair.post, dtype=np.int64) + 1))
        ys = np.asarray(pair.response, dtype=np.int64)
        sub = probs[np.ix_(rows, ys)]
        col = sub.sum(axis=0)
        ll += float(np.sum(np.log(col / len(rows))))
        if counts is not None:
            np.add.at(counts, (rows[:, None], ys[None, :]), sub / col)
    return ll


def train_ibm1(pairs: Sequence[DialoguePair], vocab_size: int, iterations: int = 5,
               floor: float = 1e-4) -> TranslationTable:
    """Fit tr(response token | post token) by Model 1 EM with a NULL source.

    Starts from uniform rows over the output space.  Rows of source tokens
    that never occur in ``pairs`` stay uniform.  ``loglik_history[i]`` is the
    corpus log-likelihood after iteration ``i``; entry 0 is the uniform
    starting point.
    """
    if not pairs:
        raise ValueError("cannot train IBM Model 1 on an empty corpus")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    mask = output_mask(vocab_size)
    probs = np.tile(mask / mask.sum(), (vocab_size + 1, 1))
    history = [_ibm1_pass(probs, pairs, None)]
    for _ in range(iterations):
        counts = np.zeros_like(probs)
        _ibm1_pass(probs, pairs, counts)
        totals = counts.sum(axis=1)
        seen = totals > 0
        probs[seen] = counts[seen] / totals[seen, None]
        history.append(_ibm1_pass(probs, pairs, None))
    return TranslationTable(probs, iterations, history, floor)


def ibm1_logprob(table: TranslationTable, x: Sequence[int], y: Sequence[int]) -> float:
    if len(y) == 0:
        return 0.0
    vec = table.token_logprob_vector(x)
    return math.fsum(vec[list(y)])


@dataclass
class ConditionalScorer:
    """log P(y | x) = (1 - gamma) * ngram + gamma * ibm1."""

    ngram: NGramModel
    table: TranslationTable
    gamma: float = 0.3

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        if self.ngram.vocab_size != self.table.vocab_size:
            raise ValueError("n-gram model and translation table disagree on vocabulary size")

    @property
    def vocab_size(self) -> int:
        return self.ngram.vocab_size


def conditional_logprob(scorer: ConditionalScorer, x: Sequence[int], y: Sequence[int]) -> float:
    g = scorer.gamma
    lm = sequence_logprob(scorer.ngram, y) if g < 1 else 0.0
    tm = ibm1_logprob(scorer.table, x, y) if g > 0 else 0.0
    return (1 - g) * lm + g * tm
