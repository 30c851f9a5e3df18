from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pytest

from emosa.corpus import LABELS, NUM_RESERVED, DialoguePair
from emosa.emotion import EmotionClassifier, train_emotion
from emosa.lm import ConditionalScorer, train_ibm1, train_ngram


@dataclass
class Toy:
    """Randomly generated id corpus and the models trained on it."""

    v: int
    pairs: list[DialoguePair]
    scorer: ConditionalScorer
    clf: EmotionClassifier

    @property
    def responses(self):
        return [p.response for p in self.pairs]

    @property
    def words(self):
        return list(range(NUM_RESERVED, self.v))


def random_pairs(rng: np.random.Generator, n_words: int, n_pairs: int, max_len: int = 5):
    v = NUM_RESERVED + n_words
    pairs = []
    for _ in range(n_pairs):
        post = tuple(int(w) for w in rng.integers(NUM_RESERVED, v, rng.integers(1, max_len + 1)))
        resp = tuple(int(w) for w in rng.integers(NUM_RESERVED, v, rng.integers(1, max_len + 1)))
        pairs.append(DialoguePair(post, resp, LABELS[rng.integers(len(LABELS))]))
    return v, pairs


def make_toy(seed: int, n_words: int = 8, n_pairs: int = 30, gamma: float = 0.3,
             order: int = 3, ibm_iters: int = 3, max_len: int = 5) -> Toy:
    rng = np.random.default_rng(seed)
    v, pairs = random_pairs(rng, n_words, n_pairs, max_len)
    ngram = train_ngram([p.response for p in pairs], v, order=order)
    table = train_ibm1(pairs, v, ibm_iters)
    clf = train_emotion([(p.response, p.label) for p in pairs], v)
    return Toy(v, pairs, ConditionalScorer(ngram, table, gamma), clf)


@pytest.fixture
def toy() -> Toy:
    return make_toy(0)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one acceptance line, print it, then assert the outcome."""
    def record(number: int, title: str, ok: bool, detail: str):
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
