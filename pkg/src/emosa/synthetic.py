"""Deterministic synthetic dialogue corpus with emotion-marked vocabulary.

Every post is drawn from one of ``n_topics`` topics.  Its response is one of
the topic's stock phrases with an emotion marker word after the first word,
unless the label is neutral.  Marker use is noisy: with probability
``marker_noise`` a response borrows a marker from another emotion.  Neutral
is the most frequent label in the training splits and neutral responses are
bare phrases, so the most probable response under a plain language model
carries no emotion at all.  The test split is label-balanced by default.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import LABELS, DialoguePair, EmotionLabel, write_corpus

MARKERS = {
    EmotionLabel.HAPPY: ("haha", "hehe", "yay", "lol"),
    EmotionLabel.ANGRY: ("damn", "hell", "furious", "annoying"),
    EmotionLabel.DISGUST: ("gross", "yuck", "nasty", "awful"),
    EmotionLabel.SAD: ("sigh", "alas", "sadly", "tears"),
    EmotionLabel.LIKE: ("love", "adore", "sweet", "lovely"),
}
MARKER_WEIGHTS = (0.55, 0.25, 0.12, 0.08)
TRAIN_LABEL_WEIGHTS = (0.1, 0.1, 0.1, 0.1, 0.1, 0.5)
BALANCED = (1 / 6,) * 6
PHRASE_WEIGHTS = (0.8, 0.2)

_ONSETS = "b d f g k l m n p r s t v z".split()
_VOWELS = "a e i o u".split()


@dataclass(frozen=True)
class Topic:
    post_words: tuple[str, ...]
    phrases: tuple[tuple[str, ...], ...]


@dataclass(frozen=True)
class Fixture:
    topics: tuple[Topic, ...]
    train: list[DialoguePair]
    judge: list[DialoguePair]
    test: list[DialoguePair]


def _words(rng: np.random.Generator, n: int, taken: set[str]) -> list[str]:
    out = []
    while len(out) < n:
        syl = rng.integers(2, 4)
        w = "".join(_ONSETS[rng.integers(len(_ONSETS))] + _VOWELS[rng.integers(len(_VOWELS))]
                    for _ in range(syl))
        if w not in taken:
            taken.add(w)
            out.append(w)
    return out


def make_topics(rng: np.random.Generator, n_topics: int = 6, post_words: int = 8,
                response_words: int = 4, phrase_len: int = 2) -> tuple[Topic, ...]:
    """Topics with a private post vocabulary and a few short stock phrases.

    Each phrase is ``phrase_len`` of the topic's response words in a fixed
    order.  No two phrases of a topic share a first word.
    """
    taken = {m for ms in MARKERS.values() for m in ms}
    topics = []
    for _ in range(n_topics):
        pw = _words(rng, post_words, taken)
        rw = _words(rng, response_words, taken)
        phrases = []
        for i in range(len(PHRASE_WEIGHTS)):
            rest = [w for w in rw if w != rw[i]]
            order = rng.permutation(len(rest))[:phrase_len - 1]
            phrases.append((rw[i],) + tuple(rest[j] for j in order))
        topics.append(Topic(tuple(pw), tuple(phrases)))
    return tuple(topics)


def sample_pair(rng: np.random.Generator, topics: tuple[Topic, ...],
                marker_noise: float = 0.2,
                label_weights: tuple[float, ...] = TRAIN_LABEL_WEIGHTS,
                marker_at: int = 1) -> DialoguePair:
    topic = topics[rng.integers(len(topics))]
    post = tuple(topic.post_words[rng.integers(len(topic.post_words))]
                 for _ in range(int(rng.integers(3, 6))))
    phrase = topic.phrases[rng.choice(len(PHRASE_WEIGHTS), p=PHRASE_WEIGHTS)]
    label = LABELS[rng.choice(len(LABELS), p=label_weights)]
    if label == EmotionLabel.NEUTRAL:
        return DialoguePair(post, phrase, label)
    source = label
    if rng.random() < marker_noise:
        others = [e for e in MARKERS if e != label]
        source = others[rng.integers(len(others))]
    marker = MARKERS[source][rng.choice(len(MARKER_WEIGHTS), p=MARKER_WEIGHTS)]
    return DialoguePair(post, phrase[:marker_at] + (marker,) + phrase[marker_at:], label)


def make_fixture(seed: int = 0, n_train: int = 2000, n_judge: int = 1000, n_test: int = 200,
                 n_topics: int = 6, marker_noise: float = 0.2,
                 test_label_weights: tuple[float, ...] = BALANCED, marker_at: int = 1,
                 phrase_len: int = 2) -> Fixture:
    """Train / judge / test splits drawn independently from one generator.

    The marker goes before ``phrase[marker_at]``.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    topics = make_topics(rng, n_topics, phrase_len=phrase_len)
    train = [sample_pair(rng, topics, marker_noise, marker_at=marker_at) for _ in range(n_train)]
    judge = [sample_pair(rng, topics, marker_noise, marker_at=marker_at) for _ in range(n_judge)]
    test = [sample_pair(rng, topics, marker_noise, test_label_weights, marker_at) for _ in range(n_test)]
    return Fixture(topics, train, judge, test)


def write_fixture(outdir: str | Path, seed: int = 0, **kwargs) -> Fixture:
    """Write ``train.tsv``, ``judge.tsv`` and ``test.tsv`` under ``outdir``."""
    fx = make_fixture(seed, **kwargs)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for name in ("train", "judge", "test"):
        write_corpus(getattr(fx, name), outdir / f"{name}.tsv")
    return fx
