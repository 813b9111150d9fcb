"""Command-line interface.

Every subcommand reads the files named by its flags and writes to stdout or
``--out``. Failures exit with status 1 and a single ``vnsrl: error: ...``
line on stderr. Run settings may come from a JSON file named by the
``SRL_CONFIG`` environment variable; explicit flags override it.
"""
from __future__ import annotations

import argparse
import contextlib
import dataclasses
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .convert import convert_tree, load_rules
from .corpus import (Argument, GoldRecord, PredicateAnnotation, generate_corpus, propositions,
                     read_corpus, write_corpus)
from .embeddings import SUBSTITUTABLE, load_embeddings, project_2d
from .evaluation import (cross_validate, extraction_scores, format_curve_tsv, format_cv,
                         format_report, learning_curve, per_role_report)
from .extraction import get_extractor
from .features import get_feature_set
from .learning import REL
from .pipeline import SemanticRoleLabeler, load_model, save_model
from .treebank import BracketedTree, TreeParseError, read_treebank, render_tree

__all__ = ["RunConfig", "build_parser", "main"]

CONFIG_ENV = "SRL_CONFIG"


@dataclass
class RunConfig:
    """Settings shared by ``train``, ``cv`` and ``curve``."""

    feature_set: str = "phi11"
    classifier: str = "svm"
    C: Optional[float] = None
    n_epochs: int = 50
    eta0: float = 0.1
    batch_size: int = 16
    strategy: str = "1step"
    extractor: str = "algorithm1"
    use_ilp: bool = True
    constraint5: bool = True
    embeddings: dict = field(default_factory=dict)
    seed: int = 0

    def validate(self) -> "RunConfig":
        get_feature_set(self.feature_set)
        get_extractor(self.extractor)
        if self.classifier not in ("svm", "maxent"):
            raise ValueError(f"unknown classifier {self.classifier!r}")
        if self.strategy not in ("1step", "2step"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        for which in self.embeddings:
            if which not in SUBSTITUTABLE:
                raise ValueError(f"cannot substitute embeddings for {which!r}")
        if not isinstance(self.seed, int):
            raise ValueError("seed must be an integer")
        return self

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text("utf-8"))
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: invalid JSON at line {exc.lineno}") from None
        if not isinstance(data, dict):
            raise ValueError(f"{path}: expected a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"{path}: unknown config keys {unknown}")
        return cls(**data)

    def estimator(self) -> SemanticRoleLabeler:
        tables = {SUBSTITUTABLE[k]: load_embeddings(v) for k, v in sorted(self.embeddings.items())}
        return SemanticRoleLabeler(
            feature_set=self.feature_set, classifier=self.classifier, C=self.C,
            strategy=self.strategy, extractor=self.extractor, use_ilp=self.use_ilp,
            constraint5=self.constraint5, predicate_embeddings=tables.get("predicate"),
            headword_embeddings=tables.get("head_word"), n_epochs=self.n_epochs,
            eta0=self.eta0, batch_size=self.batch_size, random_state=self.seed,
        )


def resolve_config(args: argparse.Namespace) -> RunConfig:
    path = os.environ.get(CONFIG_ENV)
    config = RunConfig.from_file(path) if path else RunConfig()
    overrides = {
        "feature_set": args.features, "classifier": args.classifier, "C": args.C,
        "n_epochs": args.epochs, "strategy": args.strategy, "extractor": args.extractor,
        "use_ilp": args.ilp, "constraint5": args.constraint5, "seed": args.seed,
    }
    config = dataclasses.replace(config, **{k: v for k, v in overrides.items() if v is not None})
    if args.embed:
        embeddings = dict(config.embeddings)
        for item in args.embed:
            which, sep, path = item.partition("=")
            if not sep or not path:
                raise ValueError(f"--embed expects WHICH=FILE, got {item!r}")
            embeddings[which] = path
        config = dataclasses.replace(config, embeddings=embeddings)
    return config.validate()


# -- input helpers -------------------------------------------------------------

@contextlib.contextmanager
def _output(path: Optional[str]):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _read_gold(path: str) -> list[GoldRecord]:
    with open(path, encoding="utf-8") as fh:
        return read_corpus(fh, name=path)


def _gold_or_synthetic(args) -> list[GoldRecord]:
    if args.gold:
        return _read_gold(args.gold)
    return generate_corpus(500, seed=0)


def _predicate_leaves(tree: BracketedTree, args) -> list[int]:
    if args.predicate_index is not None:
        if not 0 <= args.predicate_index < len(tree):
            raise ValueError(f"predicate index {args.predicate_index} out of range ({len(tree)} leaves)")
        return [args.predicate_index]
    target = args.predicate.replace(" ", "_")
    return [i for i, tok in enumerate(tree.tokens) if tok == target]


def _load_sentences(args) -> list[tuple[str, BracketedTree, list[int]]]:
    """``(sentence_id, tree, predicate_leaves)`` from ``--trees`` or ``--gold``.

    A JSON-lines file supplies its own predicate positions; a bracketed
    treebank needs ``--predicate`` or ``--predicate-index``.
    """
    path = args.trees or args.gold
    if path is None:
        raise ValueError("no input: pass --trees or --gold")
    explicit = args.predicate is not None or args.predicate_index is not None
    with open(path, encoding="utf-8") as fh:
        lines = fh.readlines()
    first = next((ln.lstrip() for ln in lines if ln.strip()), "")
    out = []
    if first.startswith("{"):
        for record in read_corpus(lines, name=path):
            leaves = (_predicate_leaves(record.tree, args) if explicit
                      else [p.leaf_index for p in record.predicates])
            out.append((record.id, record.tree, leaves))
        return out
    if not explicit:
        raise ValueError("bracketed input needs --predicate or --predicate-index")
    try:
        for lineno, tree in read_treebank(lines):
            out.append((str(lineno), tree, _predicate_leaves(tree, args)))
    except TreeParseError as exc:
        raise ValueError(f"{path}: {exc}") from None
    return out


def _records(sentences, labelled) -> list[GoldRecord]:
    records = []
    for (sid, tree, leaves), per_pred in zip(sentences, labelled):
        preds = []
        for leaf, args in zip(leaves, per_pred):
            arguments = [Argument(role, tuple(span)) for span, role in args]
            if not any(a.role == REL for a in arguments):
                arguments = sorted(arguments + [Argument(REL, (leaf, leaf + 1))],
                                   key=lambda a: a.span)
            preds.append(PredicateAnnotation(leaf, arguments))
        records.append(GoldRecord(render_tree(tree), preds, sid))
    return records


# -- subcommands -----------------------------------------------------------------

def cmd_parse_check(args) -> int:
    with open(args.trees, encoding="utf-8") as fh:
        try:
            trees = list(read_treebank(fh))
        except TreeParseError as exc:
            raise ValueError(f"{args.trees}: {exc}") from None
    with _output(args.out) as out:
        if args.render:
            for _, tree in trees:
                out.write(render_tree(tree) + "\n")
        else:
            leaves = sum(len(t) for _, t in trees)
            out.write(f"{len(trees)} trees, {leaves} leaves: ok\n")
    return 0


def cmd_extract(args) -> int:
    extractor = get_extractor(args.extractor or "algorithm1")
    name = (args.extractor or "algorithm1").replace("_", "-")
    if args.score:
        if not args.gold:
            raise ValueError("--score needs --gold")
        prf = extraction_scores(_read_gold(args.gold), extractor)
        with _output(args.out) as out:
            out.write(format_report({name: prf}, tsv=args.tsv))
        return 0
    with _output(args.out) as out:
        for sid, tree, leaves in _load_sentences(args):
            for leaf in leaves:
                for cand in extractor(tree, leaf):
                    start, end = cand.span
                    out.write(f"{sid}\t{leaf}\t{name}\t{start}:{end}\t"
                              f"{tree.text(cand.span, readable=True)}\n")
    return 0


def cmd_convert(args) -> int:
    rules = load_rules(args.rules)
    sentences = _load_sentences(args)
    labelled = [[convert_tree(tree, leaf, rules) for leaf in leaves] for _, tree, leaves in sentences]
    with _output(args.out) as out:
        write_corpus(_records(sentences, labelled), out)
    return 0


def cmd_generate(args) -> int:
    corpus = generate_corpus(args.n, seed=args.seed if args.seed is not None else 0)
    with _output(args.out) as out:
        write_corpus(corpus, out)
    return 0


def cmd_train(args) -> int:
    config = resolve_config(args)
    X, y, _ = propositions(_gold_or_synthetic(args))
    model = config.estimator().fit(X, y)
    with _output(args.model or args.out) as out:
        save_model(model, out)
    return 0


def cmd_label(args) -> int:
    with open(args.model, encoding="utf-8") as fh:
        try:
            model = load_model(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{args.model}: invalid model file (line {exc.lineno})") from None
    if args.ilp is not None:
        model.set_params(use_ilp=args.ilp)
    if args.constraint5 is not None:
        model.set_params(constraint5=args.constraint5)
    sentences = _load_sentences(args)
    X = [(tree, leaf) for _, tree, leaves in sentences for leaf in leaves]
    with contextlib.ExitStack() as stack:
        trace = None
        if args.debug_ilp:
            trace = stack.enter_context(open(args.debug_ilp, "w", encoding="utf-8", newline="\n"))
        predicted = iter(model.predict(X, trace=trace))
    labelled = [[next(predicted) for _ in leaves] for _, _, leaves in sentences]
    with _output(args.out) as out:
        write_corpus(_records(sentences, labelled), out)
    return 0


def _items(records: Sequence[GoldRecord]) -> list:
    return [(r.id, p.leaf_index, a.span, a.role) for r in records for p in r.predicates
            for a in p.arguments]


def cmd_evaluate(args) -> int:
    gold, pred = _read_gold(args.gold_file), _read_gold(args.pred_file)
    report = per_role_report(_items(pred), _items(gold))
    with _output(args.out) as out:
        out.write(format_report(report, tsv=args.tsv))
    return 0


def cmd_cv(args) -> int:
    config = resolve_config(args)
    result = cross_validate(_gold_or_synthetic(args), config.estimator(), k=args.k, seed=config.seed)
    with _output(args.out) as out:
        out.write(format_cv(result, tsv=args.tsv))
    return 0


def cmd_curve(args) -> int:
    config = resolve_config(args)
    corpus = _gold_or_synthetic(args)
    if args.sizes:
        try:
            sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
        except ValueError:
            raise ValueError(f"--sizes expects comma-separated integers, got {args.sizes!r}") from None
    else:
        pool = len(corpus) - max(1, -(-len(corpus) // 10))
        sizes = sorted({max(1, pool * i // 10) for i in range(1, 11)})
    points = learning_curve(corpus, config.estimator(), sizes, seed=config.seed)
    with _output(args.out) as out:
        out.write(format_curve_tsv(points))
    return 0


def cmd_project(args) -> int:
    table = load_embeddings(args.embeddings)
    if args.words:
        words = [w for w in args.words.split(",") if w]
    else:
        words = list(table.entries)
    missing = [w for w in words if w not in table]
    if missing:
        raise ValueError(f"words not in the embedding table: {', '.join(missing)}")
    with _output(args.out) as out:
        out.write("word\tx\ty\n")
        for word, x, y in project_2d(table, words):
            out.write(f"{word}\t{x:.6f}\t{y:.6f}\n")
    return 0


# -- parser ----------------------------------------------------------------------

def _add_input(p, gold=True):
    p.add_argument("--trees", help="bracketed treebank (one tree per line) or JSON-lines corpus")
    if gold:
        p.add_argument("--gold", help="JSON-lines gold corpus")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--predicate", help="use every leaf with this token as a predicate")
    group.add_argument("--predicate-index", type=int, help="leaf index of the predicate")


def _add_model_options(p):
    p.add_argument("--gold", help="JSON-lines gold corpus (default: bundled synthetic corpus)")
    p.add_argument("--features", help="feature set, e.g. phi11 or Φ11")
    p.add_argument("--classifier", choices=["svm", "maxent"])
    p.add_argument("--C", type=float, help="inverse regularisation strength")
    p.add_argument("--epochs", type=int, help="training epochs")
    p.add_argument("--strategy", choices=["1step", "2step"])
    p.add_argument("--extractor", "--alg", dest="extractor",
                   choices=["algorithm1", "pruning", "node-mapping", "all-nodes"])
    p.add_argument("--ilp", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--constraint5", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--embed", action="append", metavar="WHICH=FILE",
                   help="substitute embeddings for predicate or headword")
    p.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vnsrl", description="Vietnamese semantic role labelling")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write output here instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse-check", parents=[common], help="validate a treebank")
    p.add_argument("--trees", required=True)
    p.add_argument("--render", action="store_true", help="print canonical renderings")
    p.set_defaults(func=cmd_parse_check)

    p = sub.add_parser("extract", parents=[common], help="list argument candidates")
    _add_input(p)
    p.add_argument("--extractor", "--alg", dest="extractor", default="algorithm1",
                   choices=["algorithm1", "pruning", "node-mapping", "all-nodes"])
    p.add_argument("--score", action="store_true", help="score candidate spans against --gold")
    p.add_argument("--tsv", action="store_true")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("convert", parents=[common], help="label predicates with the conversion rules")
    _add_input(p)
    p.add_argument("--rules", help="rule file (default: bundled rules)")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("generate", parents=[common], help="write the synthetic corpus")
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", parents=[common], help="train a model")
    _add_model_options(p)
    p.add_argument("--model", help="model file to write")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("label", parents=[common], help="label predicates with a trained model")
    _add_input(p)
    p.add_argument("--model", required=True)
    p.add_argument("--ilp", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--constraint5", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--debug-ilp", metavar="FILE", help="write each decoding problem as JSON lines")
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("evaluate", parents=[common], help="compare predicted records with gold records")
    p.add_argument("gold_file")
    p.add_argument("pred_file")
    p.add_argument("--tsv", action="store_true")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("cv", parents=[common], help="k-fold cross-validation")
    _add_model_options(p)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--tsv", action="store_true")
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("curve", parents=[common], help="learning curve as TSV")
    _add_model_options(p)
    p.add_argument("--sizes", help="comma-separated training sizes")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("project", parents=[common], help="2-D principal-component projection of embeddings")
    p.add_argument("embeddings")
    p.add_argument("--words", help="comma-separated words (default: whole table)")
    p.set_defaults(func=cmd_project)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError, IndexError) as exc:
        msg = exc.strerror + f": {exc.filename}" if isinstance(exc, OSError) and exc.filename else str(exc)
        print(f"vnsrl: error: {' '.join(msg.split())}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
