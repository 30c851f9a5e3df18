"""Simulated annealing over word edits.

Each step picks an edit kind (replace / insert / delete) and a position
uniformly, proposes a word for replace/insert by sampling from the
objective normalized over a candidate shortlist, and accepts the proposal
with probability ``min(1, exp(delta / tau))`` under a linearly decaying
temperature.  The best candidate seen at any step is returned.

Positions are 0-based.  Insertion at ``t`` places the new word before
``y[t]``, so positions range over the current sentence exactly as for the
other two edits.

Randomness comes from a single ``numpy.random.Generator`` backed by PCG64
(``numpy.random.PCG64(seed)``); per-input streams are derived with
``numpy.random.SeedSequence([seed, index])``.  Draw order within a step:
edit kind, position, proposed word, acceptance uniform.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .corpus import NUM_RESERVED
from .objective import Objective, ScoredCandidate

EDIT_KINDS = ("replace", "insert", "delete")


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """PCG64 generator for ``seed``, optionally split by integer ``key``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, *key])))


@dataclass(frozen=True)
class SaConfig:
    tau_init: float = 0.015
    decay: float = 0.03
    max_iters: int = 50
    shortlist: int | str = 500
    min_len: int = 1
    max_len: int = 30
    seed: int = 0
    op_weights: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        if self.tau_init < 0 or self.decay < 0:
            raise ValueError("tau_init and decay must be nonnegative")
        if self.min_len < 1 or self.max_len < self.min_len:
            raise ValueError("need 1 <= min_len <= max_len")
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")
        if len(self.op_weights) != 3 or min(self.op_weights) < 0:
            raise ValueError("op_weights must be three nonnegative numbers")
        if self.shortlist != "full" and (not isinstance(self.shortlist, int) or self.shortlist < 1):
            raise ValueError("shortlist must be a positive integer or 'full'")


@dataclass(frozen=True)
class EditOp:
    kind: str
    position: int
    word: int | None = None

    def __post_init__(self):
        if self.kind not in EDIT_KINDS:
            raise ValueError(f"unknown edit kind {self.kind!r}")
        if (self.word is None) != (self.kind == "delete"):
            raise ValueError("replace/insert carry a word, delete does not")


def apply_edit(y: Sequence[int], op: EditOp) -> tuple[int, ...]:
    y = tuple(y)
    t = op.position
    if op.kind == "replace":
        return y[:t] + (op.word,) + y[t + 1:]
    if op.kind == "insert":
        return y[:t] + (op.word,) + y[t:]
    return y[:t] + y[t + 1:]


@dataclass
class StepRecord:
    step: int
    tau: float
    op: EditOp
    proposal_log_f: float
    incumbent_log_f: float
    accept_prob: float
    accepted: bool
    tokens: tuple[int, ...]

    @property
    def delta(self) -> float:
        return self.proposal_log_f - self.incumbent_log_f

    def to_json(self) -> str:
        d = asdict(self)
        d["op"] = self.op.kind
        d["position"] = self.op.position
        d["word"] = self.op.word
        d["tokens"] = list(self.tokens)
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "StepRecord":
        d = json.loads(line)
        op = EditOp(d.pop("op"), d.pop("position"), d.pop("word"))
        d["tokens"] = tuple(d["tokens"])
        return cls(op=op, **d)


@dataclass
class SaTrace:
    initial: tuple[int, ...]
    initial_log_f: float
    records: list[StepRecord] = field(default_factory=list)
    best_index: int = -1  # index into records; -1 is the initial candidate

    def states(self) -> list[tuple[int, ...]]:
        """Replay accepted edits: the chain state after every step."""
        y = self.initial
        out = []
        for rec in self.records:
            if rec.accepted:
                y = apply_edit(y, rec.op)
            out.append(y)
        return out

    def best_tokens(self) -> tuple[int, ...]:
        if self.best_index < 0:
            return self.initial
        return self.records[self.best_index].tokens

    def dump(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            head = {"initial": list(self.initial), "initial_log_f": self.initial_log_f,
                    "best_index": self.best_index}
            fh.write(json.dumps(head, sort_keys=True) + "\n")
            for rec in self.records:
                fh.write(rec.to_json() + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "SaTrace":
        with open(path, encoding="utf-8") as fh:
            head = json.loads(fh.readline())
            records = [StepRecord.from_json(line) for line in fh if line.strip()]
        return cls(tuple(head["initial"]), head["initial_log_f"], records, head["best_index"])


def temperature(cfg: SaConfig, t: int) -> float:
    if t < 0:
        raise ValueError("step index must be >= 0")
    return max(0.0, cfg.tau_init - cfg.decay * t)


def propose_position(rng: np.random.Generator, T: int) -> int:
    if T < 1:
        raise ValueError("cannot pick a position in an empty sentence")
    return int(rng.integers(T))


def accept_from_delta(delta: float, tau: float) -> float:
    """min{1, exp(delta / tau)}, with the tau = 0 limit as a step function."""
    if delta >= 0:
        return 1.0
    if tau <= 0:
        return 0.0
    return math.exp(delta / tau)


def acceptance_probability(f_new: float, f_old: float, tau: float, score_mode: str = "raw") -> float:
    """Acceptance probability for moving from log-score ``f_old`` to ``f_new``.

    In ``per_token`` mode the difference is taken between log-scores.  In
    ``raw`` mode it is the difference of the probabilities themselves,
    ``exp(f_new) - exp(f_old)``; its ratio to ``tau`` is formed in log space
    so that tiny sentence probabilities do not underflow.
    """
    if tau < 0:
        raise ValueError("temperature must be nonnegative")
    if score_mode == "per_token":
        return accept_from_delta(f_new - f_old, tau)
    if score_mode != "raw":
        raise ValueError(f"unknown score mode {score_mode!r}")
    if f_new >= f_old:
        return 1.0
    if tau == 0:
        return 0.0
    # log|exp(f_new) - exp(f_old)| with f_old the larger
    log_gap = f_old + math.log(-math.expm1(f_new - f_old))
    return math.exp(-math.exp(log_gap - math.log(tau)))


def shortlist_for(objective: Objective, y: Sequence[int], t: int, kind: str,
                  size: int | str) -> np.ndarray:
    """Sorted candidate word ids for an edit at ``t``.

    Up to ``size`` words: half ranked by how much more likely they are under
    the target emotion than on average across classes, half by the n-gram
    next-word probability at ``t``.  The word being replaced is always kept.
    """
    v = objective.scorer.vocab_size
    words = np.arange(NUM_RESERVED, v)
    if size == "full" or size >= len(words):
        return words
    ll = objective.clf.log_likelihood[:, NUM_RESERVED:]
    ratio = ll[objective.e] - ll.mean(axis=0)
    half = size // 2
    top_emo = words[np.argsort(-ratio, kind="stable")[:half]]
    lm = objective.scorer.ngram
    nxt = lm.distribution(lm.context(tuple(y[:t])))[NUM_RESERVED:]
    top_lm = words[np.argsort(-nxt, kind="stable")[:size - half]]
    out = np.union1d(top_emo, top_lm)
    if kind == "replace" and y[t] >= NUM_RESERVED:
        out = np.union1d(out, [y[t]])
    return out


def _gibbs_logits(objective: Objective, y: Sequence[int], t: int, kind: str,
                  shortlist: np.ndarray) -> np.ndarray:
    if kind not in ("replace", "insert"):
        raise ValueError("word proposals exist only for replace and insert")
    if len(shortlist) == 0:
        raise ValueError("empty shortlist")
    log_f, _, _ = objective.edit_scores(y, t, kind, shortlist)
    return log_f


def gibbs_word_distribution(objective: Objective, y: Sequence[int], t: int, kind: str,
                            shortlist: Sequence[int] | str = "full") -> np.ndarray:
    """P(w) proportional to f(y with w placed at t), normalized over the shortlist."""
    if isinstance(shortlist, str):
        shortlist = shortlist_for(objective, y, t, kind, shortlist)
    log_f = _gibbs_logits(objective, y, t, kind, np.asarray(shortlist))
    return np.exp(log_f - logsumexp(log_f))


def _choose_kind(cfg: SaConfig, T: int, rng: np.random.Generator) -> str:
    w = np.array(cfg.op_weights, dtype=float)
    if T <= cfg.min_len:
        w[2] = 0.0
    if T >= cfg.max_len:
        w[1] = 0.0
    if w.sum() <= 0:
        return "replace"
    return EDIT_KINDS[int(rng.choice(3, p=w / w.sum()))]


def sa_step(incumbent: ScoredCandidate, k: int, cfg: SaConfig, objective: Objective,
            rng: np.random.Generator) -> tuple[ScoredCandidate, StepRecord]:
    y = incumbent.tokens
    kind = _choose_kind(cfg, len(y), rng)
    t = propose_position(rng, len(y))
    if kind == "delete":
        op = EditOp("delete", t)
    else:
        shortlist = shortlist_for(objective, y, t, kind, cfg.shortlist)
        log_f = _gibbs_logits(objective, y, t, kind, shortlist)
        probs = np.exp(log_f - logsumexp(log_f))
        idx = int(rng.choice(len(shortlist), p=probs))
        op = EditOp(kind, t, int(shortlist[idx]))
    proposal = objective.score(apply_edit(y, op))
    tau = temperature(cfg, k)
    p = acceptance_probability(proposal.log_f, incumbent.log_f, tau, objective.cfg.score_mode)
    accepted = bool(rng.random() < p)
    rec = StepRecord(k, tau, op, proposal.log_f, incumbent.log_f, p, accepted, proposal.tokens)
    return (proposal if accepted else incumbent), rec


def run_sa(objective: Objective, y0: Sequence[int], cfg: SaConfig = SaConfig(),
           rng: np.random.Generator | None = None) -> tuple[ScoredCandidate, SaTrace]:
    """Anneal from ``y0`` for ``cfg.max_iters`` steps; return the best candidate seen."""
    y0 = tuple(y0)
    if not y0:
        raise ValueError("initial response must be nonempty")
    if rng is None:
        rng = make_rng(cfg.seed)
    current = objective.score(y0)
    best = current
    trace = SaTrace(y0, current.log_f)
    for k in range(cfg.max_iters):
        current, rec = sa_step(current, k, cfg, objective, rng)
        trace.records.append(rec)
        if current.log_f > best.log_f:
            best = current
            trace.best_index = k
    return best, trace
