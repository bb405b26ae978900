"""Command-line interface.

Subcommands: clean, unify, combine, dedup, score, diverge, cross-eval,
report. Exit codes: 0 success, 1 validation error (including bad flags),
2 I/O or parse error. All file writes are confined to the --out directory.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .corpus import Corpus
from .dedup import find_duplicates_across, find_duplicates_within, remove_overlap
from .divergence import divergence_matrix
from .errors import InputError, ValidationError
from .harness import build_combined_train, load_config, run_cross_eval, write_cross_eval
from .ingest import (
    builtin_descriptors,
    clean_aptner,
    clean_dnrti,
    parse_attacker,
    parse_conll,
    read_conll_file,
    read_raw_file,
    write_conll_file,
)
from .metrics import (
    MatchMode,
    disagreement_report,
    fn_rate,
    read_prediction_file,
    span_prf,
    token_confusion,
)
from .unify import maps_for, unify_corpus


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the toolkit reserves 2 for I/O."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _infer_split(stem: str) -> str | None:
    lowered = stem.lower()
    for split, needles in (("train", ("train",)), ("dev", ("dev", "valid")), ("test", ("test",))):
        if any(needle in lowered for needle in needles):
            return split
    return None


def _split_for(path: Path, explicit: str | None) -> str:
    if explicit:
        return explicit
    inferred = _infer_split(path.stem)
    if inferred is None:
        raise ValidationError(
            f"cannot infer split from {path.name!r}; pass --split train|dev|test"
        )
    return inferred


def _clean_one(dataset: str, path: Path, split: str) -> Corpus:
    descriptor = builtin_descriptors()[dataset]
    if dataset == "APTNER":
        return clean_aptner(read_raw_file(path), descriptor.official_labels, split=split)
    if dataset == "DNRTI":
        return clean_dnrti(read_raw_file(path), split=split)
    if dataset == "ATTACKER":
        return parse_attacker(path.read_bytes(), split=split)
    # CYNER ships clean; run it through the generic loader to normalize format.
    return parse_conll(read_raw_file(path), name="CYNER", split=split)


def _cmd_clean(args) -> int:
    dataset = args.dataset.upper()
    source = Path(args.input)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if source.is_dir():
        produced = 0
        for path in sorted(source.iterdir()):
            if not path.is_file():
                continue
            split = _infer_split(path.stem)
            if split is None:
                continue
            corpus = _clean_one(dataset, path, split)
            write_conll_file(corpus, out_dir / f"{dataset.lower()}_{split}.conll")
            produced += 1
        if produced == 0:
            raise ValidationError(f"no train/dev/test files found in {source}")
    else:
        split = _split_for(source, args.split)
        corpus = _clean_one(dataset, source, split)
        write_conll_file(corpus, out_dir / f"{dataset.lower()}_{split}.conll")
    return 0


def _cmd_unify(args) -> int:
    source = Path(args.input)
    split = _split_for(source, args.split)
    corpus = read_conll_file(source, name=args.dataset, split=split)
    mapping = maps_for([args.dataset], args.map)[args.dataset]
    unified = unify_corpus(corpus, mapping)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_conll_file(unified, out_dir / f"{source.stem}.unified.conll")
    return 0


def _cmd_combine(args) -> int:
    names = [n.strip() for n in args.datasets.split(",") if n.strip()]
    if len(names) != len(args.inputs):
        raise ValidationError(f"{len(names)} dataset names for {len(args.inputs)} input files")
    corpora = [
        read_conll_file(Path(p), name=name, split="train")
        for name, p in zip(names, args.inputs)
    ]
    maps = maps_for(names, args.map)
    combined = build_combined_train(corpora, maps, name=args.name)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_conll_file(combined, out_dir / f"{args.name.lower()}_train.conll")
    return 0


def _named_corpora(paths: list[str], names_raw: str | None) -> list[Corpus]:
    if names_raw:
        names = [n.strip() for n in names_raw.split(",") if n.strip()]
        if len(names) != len(paths):
            raise ValidationError(f"{len(names)} names for {len(paths)} files")
    else:
        names = [Path(p).stem for p in paths]
    corpora = []
    for name, p in zip(names, paths):
        path = Path(p)
        corpora.append(read_conll_file(path, name=name, split=_infer_split(path.stem) or "train"))
    return corpora


def _cmd_dedup(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.mode == "within":
        name = args.name or "dataset"
        splits = []
        for p in args.inputs:
            path = Path(p)
            splits.append(read_conll_file(path, name=name, split=_infer_split(path.stem) or "train"))
        report = find_duplicates_within(splits)
        (out_dir / "duplicates.json").write_bytes(report.to_json().encode("utf-8"))
    elif args.mode == "across":
        if len(args.inputs) != 2:
            raise ValidationError("across mode takes exactly 2 input files")
        a, b = _named_corpora(args.inputs, args.names)
        report = find_duplicates_across(a, b)
        (out_dir / "duplicates.json").write_bytes(report.to_json().encode("utf-8"))
    else:  # remove-overlap
        if len(args.inputs) != 2:
            raise ValidationError("remove-overlap mode takes TRAIN and EVAL files")
        train, eval_corpus = _named_corpora(args.inputs, args.names)
        filtered = remove_overlap(train, eval_corpus)
        write_conll_file(filtered, out_dir / "train.dedup.conll")
        summary = {
            "kept": len(filtered),
            "removed": len(train) - len(filtered),
        }
        (out_dir / "dedup_summary.json").write_bytes(
            (json.dumps(summary, indent=2) + "\n").encode("utf-8")
        )
    return 0


def _cmd_score(args) -> int:
    gold_path = Path(args.gold)
    gold = read_conll_file(gold_path, name=gold_path.stem, split=args.split or "dev")
    pred = read_prediction_file(args.pred)
    report = span_prf(gold, pred, MatchMode(args.mode))
    sys.stdout.write(report.to_json())
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "score.json").write_bytes(report.to_json().encode("utf-8"))
    return 0


def _cmd_diverge(args) -> int:
    corpora = []
    names = [n.strip() for n in args.names.split(",")] if args.names else None
    if names and len(names) != len(args.inputs):
        raise ValidationError(f"{len(names)} names for {len(args.inputs)} files")
    for index, p in enumerate(args.inputs):
        path = Path(p)
        corpora.append(
            read_conll_file(
                path,
                name=names[index] if names else path.stem,
                split=_infer_split(path.stem) or "train",
                tag_col=args.tag_col,
                pos_col=args.pos_col,
            )
        )
    matrix = divergence_matrix(corpora, args.feature)
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / f"divergence_{args.feature}.csv").write_bytes(matrix.to_csv().encode("utf-8"))
        (out_dir / f"divergence_{args.feature}.json").write_bytes(matrix.to_json().encode("utf-8"))
    else:
        sys.stdout.write(matrix.to_csv())
    return 0


def _cmd_cross_eval(args) -> int:
    config = load_config(args.config)
    result = run_cross_eval(config, args.preds)
    out_dir = Path(args.out) if args.out else config.out_dir
    write_cross_eval(result, out_dir)
    return 0


def _cmd_report(args) -> int:
    gold_path = Path(args.gold)
    gold = read_conll_file(gold_path, name=gold_path.stem, split=args.split or "dev")
    pred = read_prediction_file(args.pred)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    confusion = token_confusion(gold, pred)
    (out_dir / "confusion.csv").write_bytes(confusion.to_csv().encode("utf-8"))
    (out_dir / "confusion.json").write_bytes(
        (json.dumps(confusion.to_dict(), indent=2) + "\n").encode("utf-8")
    )
    if args.labels:
        relevant = {label.strip() for label in args.labels.split(",") if label.strip()}
        rate = fn_rate(gold, pred, relevant)
        payload = {"relevant_labels": sorted(relevant), "fn_rate": rate}
        (out_dir / "fn_rate.json").write_bytes(
            (json.dumps(payload, indent=2) + "\n").encode("utf-8")
        )
    if args.pred_b:
        other = read_prediction_file(args.pred_b)
        report = disagreement_report(pred, other)
        (out_dir / "disagreement.json").write_bytes(report.to_json().encode("utf-8"))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cynerkit", description=__doc__)
    parser.add_argument("--version", action="version", version=f"cynerkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("clean", help="clean a raw dataset file or directory")
    p.add_argument("--dataset", required=True, choices=["aptner", "dnrti", "attacker", "cyner"])
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--split", choices=["train", "dev", "test"])
    p.set_defaults(handler=_cmd_clean)

    p = sub.add_parser("unify", help="apply a label unification to a cleaned file")
    p.add_argument("--dataset", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--map", help="mapping file; defaults to the built-in maps")
    p.add_argument("--split", choices=["train", "dev", "test"])
    p.set_defaults(handler=_cmd_unify)

    p = sub.add_parser("combine", help="build a deduplicated combined training set")
    p.add_argument("--datasets", required=True, help="comma-separated names, in order")
    p.add_argument("--in", dest="inputs", required=True, nargs="+")
    p.add_argument("--out", required=True)
    p.add_argument("--map")
    p.add_argument("--name", default="COMBINED")
    p.set_defaults(handler=_cmd_combine)

    p = sub.add_parser("dedup", help="report duplicates or remove train/eval overlap")
    p.add_argument("--mode", required=True, choices=["within", "across", "remove-overlap"])
    p.add_argument("--in", dest="inputs", required=True, nargs="+")
    p.add_argument("--out", required=True)
    p.add_argument("--name", help="dataset name (within mode)")
    p.add_argument("--names", help="comma-separated corpus names")
    p.set_defaults(handler=_cmd_dedup)

    p = sub.add_parser("score", help="score a prediction file against gold")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--mode", default="strict", choices=[m.value for m in MatchMode])
    p.add_argument("--split", choices=["train", "dev", "test"])
    p.add_argument("--out")
    p.set_defaults(handler=_cmd_score)

    p = sub.add_parser("diverge", help="pairwise JS divergence between corpora")
    p.add_argument("--feature", required=True, choices=["words", "pos", "span_length", "entity_labels"])
    p.add_argument("--in", dest="inputs", required=True, nargs="+")
    p.add_argument("--out")
    p.add_argument("--names")
    p.add_argument("--tag-col", type=int, default=1)
    p.add_argument("--pos-col", type=int, default=None)
    p.set_defaults(handler=_cmd_diverge)

    p = sub.add_parser("cross-eval", help="score all configured pairings into matrices")
    p.add_argument("--config", required=True)
    p.add_argument("--preds", required=True)
    p.add_argument("--out", help="override the config output directory")
    p.set_defaults(handler=_cmd_cross_eval)

    p = sub.add_parser("report", help="confusion, FN-rate and disagreement reports")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--pred-b", dest="pred_b")
    p.add_argument("--labels", help="comma-separated relevant labels for the FN rate")
    p.add_argument("--split", choices=["train", "dev", "test"])
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except ValidationError as exc:
        print(f"cynerkit: {exc}", file=sys.stderr)
        return 1
    except InputError as exc:
        print(f"cynerkit: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cynerkit: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
