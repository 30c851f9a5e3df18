"""Command-line entry point: ``emosa <command> [options]``.

Every hyperparameter is a field of :class:`RunConfig`.  Values resolve as
command-line flag > ``--config`` file > built-in default, and the resolved
configuration is echoed to standard error (and written as ``config.txt``
by commands that produce an output directory).

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Sequence

from .anneal import SaConfig, SaTrace
from .corpus import CorpusError, EmotionLabel, detokenize, load_corpus, tokenize
from .decode import DbsConfig
from .evaluation import EmbeddingTable, SWEEP_COLUMNS, sweep_alpha, write_sweep_csv
from .objective import ObjectiveConfig
from .pipeline import Models, Pipeline, train_models

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3
COMMANDS = ("train", "respond", "decode", "evaluate", "sweep-alpha", "trace")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    # paths
    corpus: str = ""
    judge_corpus: str = ""
    test: str = ""
    models: str = ""
    embeddings: str = ""
    out: str = ""
    # training
    min_count: int = 2
    order: int = 3
    add_k: float = 0.01
    ibm_iters: int = 5
    laplace: float = 1.0
    # objective
    alpha: float = 8.0
    score_mode: str = "raw"
    gamma: float = 0.3
    # annealing
    tau_init: float = 0.015
    decay: float = 0.03
    iters: int = 50
    shortlist: str = "500"
    min_len: int = 1
    max_len: int = 30
    op_weights: str = "1,1,1"
    seed: int = 0
    # decoding
    decoder: str = "bs"
    beam_size: int = 20
    groups: int = 20
    diversity: float = 0.5
    decode_max_len: int = 20
    # command options
    post: str = ""
    emotion: str = ""
    trace: str = ""
    nbest: int = 1
    alphas: str = "0,1,2,4,8,16,64"

    def objective(self) -> ObjectiveConfig:
        return ObjectiveConfig(self.alpha, self.score_mode)

    def sa(self) -> SaConfig:
        shortlist = self.shortlist if self.shortlist == "full" else int(self.shortlist)
        weights = tuple(float(w) for w in self.op_weights.split(","))
        return SaConfig(self.tau_init, self.decay, self.iters, shortlist, self.min_len,
                        self.max_len, self.seed, weights)

    def dbs(self) -> DbsConfig:
        return DbsConfig(self.beam_size, self.groups, self.diversity, self.decode_max_len)

    def alpha_list(self) -> list[float]:
        return [float(a) for a in self.alphas.split(",") if a.strip()]

    def echo(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in asdict(self).items())


_FIELD_TYPES = {f.name: type(f.default) for f in fields(RunConfig)}


def _convert(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    try:
        return kind(raw)
    except ValueError:
        raise UsageError(f"{key}: cannot parse {raw!r} as {kind.__name__}") from None


def read_config_file(path: str | Path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in _FIELD_TYPES:
            raise UsageError(f"{path}:{lineno}: unknown or malformed setting {line!r}")
        values[key] = _convert(key, value.strip())
    return values


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="key = value settings file")
    for f in fields(RunConfig):
        flag = "--" + f.name.replace("_", "-")
        common.add_argument(flag, dest=f.name, default=None, metavar=f.name.upper(),
                            help=f"default: {f.default!r}")
    parser = _Parser(prog="emosa", description="Emotion-controlled response generation "
                                                "by simulated annealing over word edits.")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True
    helps = {
        "train": "fit vocabulary, n-gram, Model 1 and emotion models on --corpus into --out",
        "respond": "answer --post with --emotion using --models",
        "decode": "print beam-search hypotheses for --post",
        "evaluate": "generate for every --test pair and write metrics to --out",
        "sweep-alpha": "evaluate once per emotion weight in --alphas; CSV to --out",
        "trace": "pretty-print an annealing trace file given by --trace",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values = read_config_file(args.config) if args.config else {}
    for key in _FIELD_TYPES:
        raw = getattr(args, key)
        if raw is not None:
            values[key] = _convert(key, raw)
    return RunConfig(**values)


def _require(cfg: RunConfig, *keys: str) -> None:
    missing = [k for k in keys if not getattr(cfg, k)]
    if missing:
        raise UsageError("missing required option(s): "
                         + ", ".join("--" + k.replace("_", "-") for k in missing))


def _pipeline(cfg: RunConfig) -> Pipeline:
    models = Models.load(cfg.models)
    emb = EmbeddingTable.load(cfg.embeddings) if cfg.embeddings else None
    return Pipeline(models, cfg.objective(), cfg.sa(), cfg.decoder, cfg.dbs(), cfg.gamma, emb)


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(cfg.echo(), encoding="utf-8")
    return out


def cmd_train(cfg: RunConfig, stdout) -> None:
    _require(cfg, "corpus", "out")
    train = load_corpus(cfg.corpus)
    judge = load_corpus(cfg.judge_corpus) if cfg.judge_corpus else None
    models = train_models(train, judge, cfg.min_count, cfg.order, cfg.add_k,
                          cfg.ibm_iters, cfg.laplace)
    out = _outdir(cfg)
    models.save(out)
    print(f"vocabulary {len(models.vocab)}, {len(train)} pairs -> {out}", file=stdout)


def cmd_respond(cfg: RunConfig, stdout) -> None:
    _require(cfg, "models", "post", "emotion")
    try:
        emotion = EmotionLabel.parse(cfg.emotion)
    except CorpusError as exc:
        raise UsageError(str(exc)) from None
    pipe = _pipeline(cfg)
    text, trace = pipe.respond(cfg.post, emotion)
    print(text, file=stdout)
    if cfg.trace:
        trace.dump(cfg.trace)


def cmd_decode(cfg: RunConfig, stdout) -> None:
    _require(cfg, "models", "post")
    pipe = _pipeline(cfg)
    x = pipe.models.vocab.encode(tokenize(cfg.post))
    for h in pipe.decode(x)[:cfg.nbest]:
        print(f"{h.score!r}\t{detokenize(pipe.models.vocab.decode(h.tokens))}", file=stdout)


def _test_pairs(cfg: RunConfig, pipe: Pipeline):
    pairs = [pipe.models.vocab.encode_pair(p) for p in load_corpus(cfg.test)]
    if not pairs:
        raise CorpusError(f"{cfg.test}: empty test split")
    return pairs


def cmd_evaluate(cfg: RunConfig, stdout) -> None:
    _require(cfg, "models", "test", "out")
    pipe = _pipeline(cfg)
    pairs = _test_pairs(cfg, pipe)
    report, outputs = pipe.evaluate(pairs)
    out = _outdir(cfg)
    (out / "report.json").write_text(report.to_json() + "\n", encoding="utf-8")
    row = {k: v for k, v in asdict(report).items() if v is not None}
    with open(out / "metrics.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(row), lineterminator="\n")
        w.writeheader()
        w.writerow({k: repr(v) for k, v in row.items()})
    vocab = pipe.models.vocab
    with open(out / "outputs.tsv", "w", encoding="utf-8", newline="\n") as fh:
        for p, y in zip(pairs, outputs):
            fh.write(f"{detokenize(vocab.decode(p.post))}\t{detokenize(vocab.decode(y))}\t{p.label}\n")
    print(report.to_json(), file=stdout)


def cmd_sweep(cfg: RunConfig, stdout) -> None:
    _require(cfg, "models", "test", "out")
    alphas = cfg.alpha_list()
    if not alphas:
        raise UsageError("--alphas is empty")
    pipe = _pipeline(cfg)
    rows = sweep_alpha(pipe, _test_pairs(cfg, pipe), alphas)
    out = _outdir(cfg)
    write_sweep_csv(rows, out / "sweep.csv")
    print(",".join(SWEEP_COLUMNS), file=stdout)
    for r in rows:
        print(",".join(f"{r[k]:.4f}" for k in SWEEP_COLUMNS), file=stdout)


def format_trace(trace: SaTrace, decode=None) -> list[str]:
    """One line per step: op, position, word, delta, tau, acceptance."""
    def show(tokens):
        return " ".join(decode(tokens)) if decode else " ".join(map(str, tokens))

    lines = [f"init log_f={trace.initial_log_f:.6f} y={show(trace.initial)}"]
    for r in trace.records:
        word = "-" if r.op.word is None else show((r.op.word,))
        mark = "*" if r.step == trace.best_index else " "
        lines.append(f"{mark}{r.step:4d} {r.op.kind:<7} pos={r.op.position:<3d} word={word:<12} "
                     f"delta={r.delta:+.6f} tau={r.tau:.4f} p={r.accept_prob:.4f} "
                     f"{'accept' if r.accepted else 'reject'}")
    lines.append(f"best y={show(trace.best_tokens())}")
    return lines


def cmd_trace(cfg: RunConfig, stdout) -> None:
    _require(cfg, "trace")
    trace = SaTrace.load(cfg.trace)
    decode = Models.load(cfg.models).vocab.decode if cfg.models else None
    for line in format_trace(trace, decode):
        print(line, file=stdout)


HANDLERS = {
    "train": cmd_train,
    "respond": cmd_respond,
    "decode": cmd_decode,
    "evaluate": cmd_evaluate,
    "sweep-alpha": cmd_sweep,
    "trace": cmd_trace,
}


def main(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    handler = logging.StreamHandler(stderr)
    handler.setFormatter(logging.Formatter("warning: %(message)s"))
    log = logging.getLogger("emosa")
    log.addHandler(handler)
    try:
        try:
            args = build_parser().parse_args(argv)
            cfg = resolve_config(args)
            cfg.objective(), cfg.sa(), cfg.dbs()
            if cfg.decoder not in ("bs", "dbs"):
                raise UsageError("--decoder must be bs or dbs")
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        stderr.write("".join("# " + line + "\n" for line in cfg.echo().splitlines()))
        HANDLERS[args.command](cfg, stdout)
        return EXIT_OK
    except UsageError as exc:
        print(f"emosa: usage error: {exc}", file=stderr)
        return EXIT_USAGE
    except (CorpusError, OSError, ValueError, KeyError) as exc:
        print(f"emosa: data error: {exc}", file=stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        print(f"emosa: internal error: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_INTERNAL
    finally:
        log.removeHandler(handler)


if __name__ == "__main__":
    sys.exit(main())
