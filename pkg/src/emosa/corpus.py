"""Dialogue corpus ingestion, tokenization and vocabulary."""
from __future__ import annotations

import enum
import json
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

PAD, UNK, BOS, EOS = 0, 1, 2, 3
RESERVED_TOKENS = ("<pad>", "<unk>", "<s>", "</s>")
NUM_RESERVED = len(RESERVED_TOKENS)


class CorpusError(ValueError):
    """Malformed corpus input."""


class EmotionLabel(enum.IntEnum):
    # Order doubles as the classifier tie-break order.
    HAPPY = 0
    ANGRY = 1
    DISGUST = 2
    SAD = 3
    LIKE = 4
    NEUTRAL = 5

    def __str__(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, value: "str | EmotionLabel") -> "EmotionLabel":
        if isinstance(value, EmotionLabel):
            return value
        try:
            return cls[str(value).strip().upper()]
        except KeyError:
            valid = ", ".join(str(e) for e in cls)
            raise CorpusError(f"unknown label {value!r} (valid: {valid})") from None


LABELS = tuple(EmotionLabel)

# Scripts written without spaces between words: one token per character.
_NOSPACE = (
    "぀-ヿ"  # kana
    "㐀-䶿一-鿿豈-﫿"  # CJK ideographs
    "가-힯"  # hangul
    "฀-๿"  # thai
)
_TOKEN_RE = re.compile(rf"[{_NOSPACE}]|[^\W{_NOSPACE}]+|[^\w\s]")
_NOSPACE_RE = re.compile(rf"[{_NOSPACE}]")


def tokenize(text: str) -> list[str]:
    """Split ``text`` into lowercased word and punctuation tokens.

    Text is NFKC-normalized first.  Characters from scripts that do not
    mark word boundaries with whitespace become one token each.

    >>> tokenize("Happy birthday~")
    ['happy', 'birthday', '~']
    """
    text = unicodedata.normalize("NFKC", text).lower()
    return _TOKEN_RE.findall(text)


def detokenize(tokens: Sequence[str]) -> str:
    out: list[str] = []
    for tok in tokens:
        if out and not (_NOSPACE_RE.fullmatch(tok) and _NOSPACE_RE.fullmatch(out[-1])):
            out.append(" ")
        out.append(tok)
    return "".join(out)


@dataclass(frozen=True)
class DialoguePair:
    """A post, its response and the response's emotion label.

    Tokens are strings straight out of :func:`load_corpus` and integer ids
    after :meth:`Vocabulary.encode_pair`.
    """

    post: tuple
    response: tuple
    label: EmotionLabel


class Vocabulary:
    """Bidirectional token/id map with four reserved ids."""

    def __init__(self, tokens: Iterable[str]):
        self.itos: list[str] = list(RESERVED_TOKENS)
        for tok in tokens:
            if tok in RESERVED_TOKENS:
                raise ValueError(f"reserved token {tok!r} in vocabulary list")
            self.itos.append(tok)
        self.stoi = {tok: i for i, tok in enumerate(self.itos)}
        if len(self.stoi) != len(self.itos):
            raise ValueError("duplicate tokens in vocabulary")

    def __len__(self) -> int:
        return len(self.itos)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Vocabulary) and self.itos == other.itos

    def __contains__(self, token: str) -> bool:
        return token in self.stoi

    @property
    def word_ids(self) -> range:
        """Ids of all non-reserved tokens."""
        return range(NUM_RESERVED, len(self.itos))

    def encode(self, tokens: Iterable[str]) -> tuple[int, ...]:
        return tuple(self.stoi.get(t, UNK) for t in tokens)

    def decode(self, ids: Iterable[int]) -> tuple[str, ...]:
        return tuple(self.itos[i] for i in ids)

    def encode_pair(self, pair: DialoguePair) -> DialoguePair:
        return DialoguePair(self.encode(pair.post), self.encode(pair.response), pair.label)

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for i, tok in enumerate(self.itos):
                fh.write(f"{tok}\t{i}\n")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        itos = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                tok, _, idx = line.rpartition("\t")
                if not tok or int(idx) != len(itos):
                    raise CorpusError(f"{path}:{lineno}: bad vocabulary record")
                itos.append(tok)
        if tuple(itos[:NUM_RESERVED]) != RESERVED_TOKENS:
            raise CorpusError(f"{path}: reserved tokens missing or out of order")
        return cls(itos[NUM_RESERVED:])


def build_vocabulary(pairs: Sequence[DialoguePair], min_count: int = 2) -> Vocabulary:
    """Collect tokens seen at least ``min_count`` times in posts and responses.

    Ids are assigned by descending frequency, ties broken lexicographically.
    """
    if not pairs:
        raise CorpusError("cannot build a vocabulary from an empty corpus")
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    counts: Counter[str] = Counter()
    for pair in pairs:
        counts.update(pair.post)
        counts.update(pair.response)
    kept = [tok for tok, c in counts.items() if c >= min_count]
    kept.sort(key=lambda tok: (-counts[tok], tok))
    return Vocabulary(kept)


def _make_pair(post: str, response: str, emotion: str, where: str) -> DialoguePair:
    label = EmotionLabel.parse(emotion)
    p, r = tokenize(post), tokenize(response)
    if not p or not r:
        raise CorpusError(f"{where}: empty post or response")
    return DialoguePair(tuple(p), tuple(r), label)


def load_corpus(path: str | Path, format: str | None = None) -> list[DialoguePair]:
    """Read ``post<TAB>response<TAB>emotion`` lines or JSON lines.

    ``format`` is ``"tsv"`` or ``"jsonl"``; when omitted it is taken from the
    file suffix.  Blank lines are skipped.  Unknown emotion labels and
    malformed records raise :class:`CorpusError` naming the line.
    """
    path = Path(path)
    if format is None:
        format = "jsonl" if path.suffix in (".jsonl", ".json") else "tsv"
    if format not in ("tsv", "jsonl"):
        raise ValueError(f"unsupported corpus format {format!r}")
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            where = f"{path}:{lineno}"
            if format == "tsv":
                fields = line.split("\t")
                if len(fields) != 3:
                    raise CorpusError(f"{where}: expected 3 tab-separated fields, got {len(fields)}")
                post, response, emotion = fields
            else:
                try:
                    rec = json.loads(line)
                    post, response, emotion = rec["post"], rec["response"], rec["emotion"]
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise CorpusError(f"{where}: malformed record ({exc})") from None
            try:
                pairs.append(_make_pair(post, response, emotion, where))
            except CorpusError as exc:
                if str(exc).startswith(where):
                    raise
                raise CorpusError(f"{where}: {exc}") from None
    return pairs


def write_corpus(pairs: Iterable[DialoguePair], path: str | Path) -> None:
    """Write string-token pairs as TSV (tokens joined by spaces)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for p in pairs:
            fh.write(f"{detokenize(p.post)}\t{detokenize(p.response)}\t{p.label}\n")
