"""Experiment orchestration: pairing preparation, combined training sets,
cross-dataset evaluation matrices, and the reproducibility manifest.

The harness never trains models. Training is delegated to an external
trainer through the prediction-file contract, which keeps this suite
runnable with fixtures alone. All outputs are deterministic: identical
config and inputs produce byte-identical files, so no timestamps appear
anywhere.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import os
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .corpus import Corpus
from .dedup import remove_overlap, sentence_key
from .errors import ConfigError, MissingPrediction, ParseError
from .ingest import read_conll_file
from .metrics import MatchMode, MetricReport, read_prediction_file, span_prf
from .unify import UnificationMap, maps_for, unify_corpus

PREDICTION_FILE_PATTERN = "{train}__{eval}.tsv"


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one cross-eval run needs, resolved and validated.

    ``dataset_paths`` maps name -> {split -> path}; every referenced
    dataset must have train and dev paths. ``pairings`` is the ordered list
    of (train, eval) dataset names.
    """

    dataset_names: tuple[str, ...]
    dataset_paths: dict[str, dict[str, Path]]
    pairings: tuple[tuple[str, str], ...]
    modes: tuple[MatchMode, ...] = (MatchMode.STRICT, MatchMode.UNLABELLED, MatchMode.LOOSE)
    mapping_file: Path | None = None
    seed: int = 0
    out_dir: Path = Path("out")
    config_path: Path | None = None

    def __post_init__(self):
        for name in self.dataset_names:
            paths = self.dataset_paths.get(name, {})
            for split in ("train", "dev"):
                if split not in paths:
                    raise ConfigError(f"dataset {name} lacks a {split} path")
        for train, eval_name in self.pairings:
            for name in (train, eval_name):
                if name not in self.dataset_names:
                    raise ConfigError(f"pairing references unknown dataset {name!r}")


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse the sectioned key-value experiment config.

    Schema (INI, UTF-8):

        [run]
        out = results
        seed = 13

        [datasets]
        names = APTNER, CYNER, DNRTI, ATTACKER

        [dataset.APTNER]
        train = cleaned/aptner_train.conll
        dev = cleaned/aptner_dev.conll

        [unification]
        maps = builtin            ; or a mapping-file path

        [pairings]
        pairs = all               ; or "A:B, B:A" entries

        [metrics]
        modes = strict, unlabelled, loose

    The NER_UNIFY_SEED environment variable overrides the config seed.
    """
    path = Path(path)
    parser = configparser.ConfigParser()
    try:
        text = path.read_bytes().decode("utf-8")
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: invalid UTF-8 ({exc.reason})", offset=exc.start) from None
    parser.read_string(text, source=str(path))

    def split_list(raw: str) -> list[str]:
        return [item.strip() for item in raw.split(",") if item.strip()]

    if not parser.has_option("datasets", "names"):
        raise ConfigError(f"{path}: missing [datasets] names")
    names = tuple(split_list(parser.get("datasets", "names")))
    if not names:
        raise ConfigError(f"{path}: empty dataset list")

    dataset_paths: dict[str, dict[str, Path]] = {}
    base = path.parent
    for name in names:
        section = f"dataset.{name}"
        if not parser.has_section(section):
            raise ConfigError(f"{path}: missing section [{section}]")
        dataset_paths[name] = {
            split: base / parser.get(section, split)
            for split in ("train", "dev", "test")
            if parser.has_option(section, split)
        }

    maps_raw = parser.get("unification", "maps", fallback="builtin").strip()
    mapping_file = None if maps_raw == "builtin" else base / maps_raw

    pairs_raw = parser.get("pairings", "pairs", fallback="all").strip()
    if pairs_raw == "all":
        pairings = tuple((t, e) for t in names for e in names)
    else:
        pairings = []
        for item in split_list(pairs_raw):
            if ":" not in item:
                raise ConfigError(f"{path}: pairing {item!r} is not of the form TRAIN:EVAL")
            train, eval_name = (part.strip() for part in item.split(":", 1))
            pairings.append((train, eval_name))
        pairings = tuple(pairings)

    modes_raw = split_list(parser.get("metrics", "modes", fallback="strict, unlabelled, loose"))
    try:
        modes = tuple(MatchMode(m) for m in modes_raw)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None

    seed = parser.getint("run", "seed", fallback=0)
    env_seed = os.environ.get("NER_UNIFY_SEED")
    if env_seed is not None:
        try:
            seed = int(env_seed)
        except ValueError:
            raise ConfigError(f"NER_UNIFY_SEED={env_seed!r} is not an integer") from None
    out_dir = base / parser.get("run", "out", fallback="out")

    return ExperimentConfig(
        dataset_names=names,
        dataset_paths=dataset_paths,
        pairings=pairings,
        modes=modes,
        mapping_file=mapping_file,
        seed=seed,
        out_dir=out_dir,
        config_path=path,
    )


def prepare_pairing(
    train: Corpus,
    eval_corpus: Corpus,
    map_train: UnificationMap,
    map_eval: UnificationMap,
) -> tuple[Corpus, Corpus]:
    """Unify both corpora, then strip eval-overlapping sentences from train.

    Applies to self-pairings too: train/dev overlap within one dataset is
    leakage all the same.
    """
    train_unified = unify_corpus(train, map_train)
    eval_unified = unify_corpus(eval_corpus, map_eval)
    train_filtered = remove_overlap(train_unified, eval_unified)
    return train_filtered, eval_unified


def build_combined_train(
    corpora: Sequence[Corpus],
    maps: dict[str, UnificationMap],
    name: str = "COMBINED",
) -> Corpus:
    """Concatenate unified corpora in declared order, deduplicating across them.

    The first occurrence (by declared dataset order) wins; labels of
    dropped duplicates are discarded, since annotation conflicts between
    datasets are real. Overlap with any eval set is removed downstream by
    prepare_pairing.
    """
    if len(corpora) < 2:
        raise ConfigError("combined training needs at least 2 corpora")
    seen: set[tuple[str, ...]] = set()
    sentences = []
    schema: set[str] = set()
    for corpus in corpora:
        unified = unify_corpus(corpus, maps[corpus.name])
        schema |= unified.schema
        for sentence in unified:
            key = sentence_key(sentence)
            if key in seen:
                continue
            seen.add(key)
            sentences.append(sentence)
    return Corpus(name, "train", frozenset(schema), tuple(sentences))


@dataclass(frozen=True)
class EvalMatrix:
    """Train-by-eval grid of metric reports for one match mode.

    Training datasets are the rows, evaluation (dev) datasets the columns;
    diagonal cells are intra-dataset results.
    """

    train_names: tuple[str, ...]
    eval_names: tuple[str, ...]
    cells: dict[tuple[str, str], MetricReport]
    mode: MatchMode = MatchMode.STRICT

    def f1_cells(self) -> dict[tuple[str, str], float]:
        return {key: report.f1 for key, report in self.cells.items()}

    def to_csv(self, metric: str = "f1") -> str:
        header = "train," + ",".join(self.eval_names)
        rows = []
        for train in self.train_names:
            cells = []
            for eval_name in self.eval_names:
                report = self.cells.get((train, eval_name))
                value = "" if report is None else format(getattr(report, metric), ".12g")
                cells.append(value)
            rows.append(f"{train}," + ",".join(cells))
        return "\n".join([header, *rows]) + "\n"

    def is_intra(self, train: str, eval_name: str) -> bool:
        """Diagonal cells evaluate a model on its own dataset's dev split."""
        return train == eval_name

    def to_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "train_names": list(self.train_names),
            "eval_names": list(self.eval_names),
            "cells": {
                train: {
                    eval_name: {
                        "intra_dataset": self.is_intra(train, eval_name),
                        **self.cells[(train, eval_name)].to_dict(),
                    }
                    for eval_name in self.eval_names
                    if (train, eval_name) in self.cells
                }
                for train in self.train_names
            },
        }


@dataclass(frozen=True)
class CrossEvalResult:
    matrices: dict[MatchMode, EvalMatrix]
    manifest: dict

    def matrix(self, mode: MatchMode) -> EvalMatrix:
        return self.matrices[mode]


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _load_corpus(config: ExperimentConfig, name: str, split: str) -> Corpus:
    try:
        path = config.dataset_paths[name][split]
    except KeyError:
        raise ConfigError(f"no {split} path configured for dataset {name}") from None
    return read_conll_file(path, name=name, split=split)


def run_cross_eval(config: ExperimentConfig, predictions_dir: str | Path) -> CrossEvalResult:
    """Score every configured pairing from its prediction file.

    Produces one EvalMatrix per configured mode. Strict precision/recall
    matrices fall out of the strict reports. Re-asserts the leakage
    post-condition for every pairing and records the dedup counts in the
    manifest.
    """
    predictions_dir = Path(predictions_dir)
    maps = maps_for(config.dataset_names, config.mapping_file)

    trains = {name: _load_corpus(config, name, "train") for name in config.dataset_names}
    devs = {name: _load_corpus(config, name, "dev") for name in config.dataset_names}

    cells: dict[MatchMode, dict[tuple[str, str], MetricReport]] = {m: {} for m in config.modes}
    dedup_records = []
    for train_name, eval_name in config.pairings:
        train_prepared, eval_prepared = prepare_pairing(
            trains[train_name], devs[eval_name], maps[train_name], maps[eval_name]
        )
        train_keys = {sentence_key(s) for s in train_prepared}
        eval_keys = {sentence_key(s) for s in eval_prepared}
        if train_keys & eval_keys:
            raise AssertionError(
                f"leakage post-condition violated for {train_name} -> {eval_name}"
            )
        dedup_records.append(
            {
                "train": train_name,
                "eval": eval_name,
                "train_sentences_kept": len(train_prepared),
                "train_sentences_removed": len(trains[train_name]) - len(train_prepared),
            }
        )
        pred_path = predictions_dir / PREDICTION_FILE_PATTERN.format(
            train=train_name, eval=eval_name
        )
        if not pred_path.exists():
            raise MissingPrediction(train_name, eval_name, str(pred_path))
        prediction = read_prediction_file(pred_path)
        for mode in config.modes:
            cells[mode][(train_name, eval_name)] = span_prf(eval_prepared, prediction, mode)

    train_names = tuple(dict.fromkeys(t for t, _ in config.pairings))
    eval_names = tuple(dict.fromkeys(e for _, e in config.pairings))
    matrices = {
        mode: EvalMatrix(train_names, eval_names, cells[mode], mode) for mode in config.modes
    }

    input_digests = {
        f"{name}/{split}": _sha256(path)
        for name in config.dataset_names
        for split, path in sorted(config.dataset_paths[name].items())
    }
    prediction_digests = {
        f"{t}__{e}": _sha256(predictions_dir / PREDICTION_FILE_PATTERN.format(train=t, eval=e))
        for t, e in config.pairings
    }
    manifest = {
        "toolkit_version": __version__,
        "seed": config.seed,
        "config_digest": _sha256(config.config_path) if config.config_path else None,
        "input_digests": input_digests,
        "prediction_digests": prediction_digests,
        "dedup": dedup_records,
        "pairings": [list(p) for p in config.pairings],
        "modes": [m.value for m in config.modes],
    }
    return CrossEvalResult(matrices, manifest)


def write_cross_eval(result: CrossEvalResult, out_dir: str | Path) -> list[Path]:
    """Write matrix CSVs, the JSON report and the manifest; manifest last."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    def emit(name: str, content: str) -> None:
        target = out_dir / name
        target.write_bytes(content.encode("utf-8"))
        written.append(target)

    for mode, matrix in result.matrices.items():
        emit(f"{mode.value}_f1.csv", matrix.to_csv("f1"))
        if mode is MatchMode.STRICT:
            emit("strict_precision.csv", matrix.to_csv("precision"))
            emit("strict_recall.csv", matrix.to_csv("recall"))
    payload = {
        "matrices": {mode.value: matrix.to_dict() for mode, matrix in result.matrices.items()}
    }
    emit("cross_eval.json", json.dumps(payload, sort_keys=True, indent=2) + "\n")
    emit("manifest.json", json.dumps(result.manifest, sort_keys=True, indent=2) + "\n")
    return written


def self_pairings(names: Iterable[str]) -> tuple[tuple[str, str], ...]:
    return tuple((name, name) for name in names)
