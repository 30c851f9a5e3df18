"""Multinomial naive Bayes emotion classifier over token ids."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .corpus import LABELS, EmotionLabel

logger = logging.getLogger(__name__)

N_CLASSES = len(LABELS)


@dataclass
class EmotionClassifier:
    """Class priors plus per-class token counts with Laplace smoothing.

    ``counts[c, w]`` is the number of times token id ``w`` occurred in
    training utterances of class ``c``.  Log-likelihoods are derived once
    at construction.
    """

    counts: np.ndarray
    class_counts: np.ndarray
    laplace: float = 1.0

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.float64)
        self.class_counts = np.asarray(self.class_counts, dtype=np.float64)
        if self.laplace <= 0:
            raise ValueError("laplace must be positive")
        self.uniform_prior_fallback = bool(np.any(self.class_counts == 0))
        if self.uniform_prior_fallback:
            self.log_prior = np.full(N_CLASSES, -np.log(N_CLASSES))
        else:
            self.log_prior = np.log(self.class_counts / self.class_counts.sum())
        v = self.counts.shape[1]
        totals = self.counts.sum(axis=1, keepdims=True)
        self.log_likelihood = np.log(self.counts + self.laplace) - np.log(totals + self.laplace * v)

    @property
    def vocab_size(self) -> int:
        return self.counts.shape[1]

    def class_scores(self, u: Sequence[int]) -> np.ndarray:
        """Unnormalized log joint per class."""
        return self.log_prior + self.log_likelihood[:, list(u)].sum(axis=1)

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            cc = ",".join(str(int(c)) for c in self.class_counts)
            fh.write(f"#emotion vocab={self.vocab_size} laplace={self.laplace!r} "
                     f"class_counts={cc} uniform_prior_fallback={int(self.uniform_prior_fallback)}\n")
            for c, label in enumerate(LABELS):
                for w in np.nonzero(self.counts[c])[0].tolist():
                    fh.write(f"{label}\t{w}\t{int(self.counts[c, w])}\n")

    @classmethod
    def load(cls, path: str | Path) -> "EmotionClassifier":
        with open(path, encoding="utf-8") as fh:
            header = dict(kv.split("=", 1) for kv in fh.readline().split()[1:])
            counts = np.zeros((N_CLASSES, int(header["vocab"])))
            for line in fh:
                label, w, n = line.rstrip("\n").split("\t")
                counts[EmotionLabel.parse(label), int(w)] = int(n)
        class_counts = [int(c) for c in header["class_counts"].split(",")]
        return cls(counts, np.array(class_counts), float(header["laplace"]))


def train_emotion(utterances: Sequence[tuple[Sequence[int], EmotionLabel]], vocab_size: int,
                  laplace: float = 1.0) -> EmotionClassifier:
    """Count tokens per class.  Absent classes switch every prior to uniform."""
    if not utterances:
        raise ValueError("cannot train an emotion classifier on an empty corpus")
    counts = np.zeros((N_CLASSES, vocab_size))
    class_counts = np.zeros(N_CLASSES)
    for tokens, label in utterances:
        c = int(EmotionLabel.parse(label))
        class_counts[c] += 1
        np.add.at(counts[c], np.asarray(tokens, dtype=np.int64), 1)
    clf = EmotionClassifier(counts, class_counts, laplace)
    if clf.uniform_prior_fallback:
        missing = [str(LABELS[c]) for c in np.nonzero(class_counts == 0)[0]]
        logger.warning("no training examples for %s; using uniform class priors", ", ".join(missing))
    return clf


def emotion_posterior(clf: EmotionClassifier, u: Sequence[int]) -> np.ndarray:
    scores = clf.class_scores(u)
    return np.exp(scores - logsumexp(scores))


def emotion_log_posterior(clf: EmotionClassifier, u: Sequence[int]) -> np.ndarray:
    scores = clf.class_scores(u)
    return scores - logsumexp(scores)


def classify(clf: EmotionClassifier, u: Sequence[int]) -> EmotionLabel:
    # np.argmax keeps the first maximum, which is the fixed label order.
    return LABELS[int(np.argmax(clf.class_scores(u)))]
