"""Acceptance gate: one test per criterion, printing a PASS/FAIL line each.

Criteria that need the four real datasets are skipped unless the
CYNERKIT_DATASETS environment variable points at a directory laid out as
described in the README (the toolkit ships no corpus data).
"""

import json
import math
import os
import random
import statistics
import time
from pathlib import Path

import pytest

from cynerkit.corpus import encode_spans, extract_spans, repair_bio2, validate_bio2
from cynerkit.distributions import CategoricalDistribution
from cynerkit.divergence import divergence_matrix, js_divergence, pearson
from cynerkit.harness import load_config, prepare_pairing, run_cross_eval, write_cross_eval
from cynerkit.ingest import (
    builtin_descriptors,
    clean_aptner,
    clean_dnrti,
    parse_attacker,
    read_raw_file,
    write_conll,
)
from cynerkit.metrics import MatchMode, build_prediction_file, span_prf
from cynerkit.unify import builtin_map, builtin_maps, unify_corpus

from .conftest import make_corpus
from .fixture_experiment import build_experiment
from .oracles import (
    direct_jsd,
    oracle_prf_counts,
    random_tag_sequence,
    random_valid_tags,
)

DATA_DIR = Path(__file__).parent / "data"
DATASETS_DIR = os.environ.get("CYNERKIT_DATASETS")

needs_datasets = pytest.mark.skipif(
    DATASETS_DIR is None,
    reason="set CYNERKIT_DATASETS to a directory with the four raw datasets",
)


def criterion(name, fn):
    try:
        result = fn()
    except BaseException:
        print(f"FAIL  {name}", flush=True)
        raise
    print(f"PASS  {name}", flush=True)
    return result


def test_metric_oracle_equivalence():
    def body():
        started = time.perf_counter()
        rng = random.Random(20_240_501)
        labels = ["Organization", "System", "Vulnerability", "Malware"]
        for case in range(500):
            n_labels = rng.randint(1, 4)
            case_labels = labels[:n_labels]
            n_sentences = rng.randint(1, 10)
            gold_tags = [
                random_valid_tags(rng, rng.randint(1, 12), case_labels)
                for _ in range(n_sentences)
            ]
            pred_tags = [
                random_tag_sequence(rng, len(tags), case_labels) for tags in gold_tags
            ]
            gold = make_corpus(gold_tags, schema=set(case_labels))
            pred = build_prediction_file(gold, pred_tags)
            for mode in (MatchMode.STRICT, MatchMode.UNLABELLED, MatchMode.LOOSE):
                report = span_prf(gold, pred, mode)
                expected = oracle_prf_counts(gold_tags, pred_tags, mode.value)
                assert (report.tp, report.fp, report.fn) == expected, (case, mode)
        elapsed = time.perf_counter() - started
        assert elapsed < 30.0, f"took {elapsed:.1f}s, budget 30s"

    criterion("metric oracle equivalence (500 corpora, 3 modes)", body)


def test_bio2_round_trip_and_repair():
    def body():
        started = time.perf_counter()
        rng = random.Random(97)
        labels = ["A", "B", "C"]
        for _ in range(10_000):
            tags = random_tag_sequence(rng, rng.randint(0, 14), labels)
            repaired = repair_bio2(tags)
            assert validate_bio2(repaired) == []
            assert repair_bio2(repaired) == repaired
            spans = extract_spans(repaired)
            assert encode_spans(len(repaired), spans) == repaired
            assert extract_spans(encode_spans(len(repaired), spans)) == spans
        elapsed = time.perf_counter() - started
        assert elapsed < 10.0, f"took {elapsed:.1f}s, budget 10s"

    criterion("BIO2 repair idempotence + decode/encode round-trip (10k sequences)", body)


def test_cleaning_golden_files():
    def body():
        aptner_raw = (DATA_DIR / "aptner_train_raw.txt").read_text(encoding="utf-8")
        # the fixture must exercise every cleaning rule
        assert "\nO\n" in aptner_raw  # "O"-only drop
        assert any(len(line.split()) >= 3 for line in aptner_raw.splitlines())
        assert "B-NOTALABEL" in aptner_raw  # out-of-set label replacement
        assert "\n. O\n" in aptner_raw  # ". O" sentence breaking
        attacker_raw = json.loads((DATA_DIR / "attacker_train_raw.json").read_bytes())
        assert any(" " in entry["tokens"] for entry in attacker_raw)

        labels = builtin_descriptors()["APTNER"].official_labels
        cleaned = clean_aptner(read_raw_file(DATA_DIR / "aptner_train_raw.txt"), labels)
        assert write_conll(cleaned).encode("utf-8") == (
            DATA_DIR / "aptner_train_cleaned.golden.conll"
        ).read_bytes()

        cleaned = clean_dnrti(read_raw_file(DATA_DIR / "dnrti_train_raw.txt"))
        assert write_conll(cleaned).encode("utf-8") == (
            DATA_DIR / "dnrti_train_cleaned.golden.conll"
        ).read_bytes()

        cleaned = parse_attacker((DATA_DIR / "attacker_train_raw.json").read_bytes())
        assert write_conll(cleaned).encode("utf-8") == (
            DATA_DIR / "attacker_train_cleaned.golden.conll"
        ).read_bytes()

    criterion("cleaning golden files byte-identical (all three cleaners)", body)


def test_unification():
    def body():
        expected = {
            "APTNER": {
                "APT": "Organization",
                "SECTEAM": "Organization",
                "OS": "System",
                "VULNAME": "Vulnerability",
                "MAL": "Malware",
            },
            "DNRTI": {
                "HackOrg": "Organization",
                "SecTeam": "Organization",
                "org": "Organization",
                "Tool": "System",
                "Way": "Vulnerability",
                "exp": "Vulnerability",
                "SamFile": "Malware",
            },
            "ATTACKER": {
                "THREAT_ACTOR": "Organization",
                "GENERAL_IDENTITY": "Organization",
                "INFRASTRUCTURE": "System",
                "GENERAL_TOOL": "System",
                "ATTACK_TOOL": "System",
                "VULNERABILITY": "Vulnerability",
                "MALWARE": "Malware",
            },
            "CYNER": {
                "Organization": "Organization",
                "System": "System",
                "Vulnerability": "Vulnerability",
                "Malware": "Malware",
            },
        }
        assert {m.dataset: m.entries for m in builtin_maps()} == expected
        assert builtin_map("CYNER").target("Indicator") is None

        rng = random.Random(41)
        source_labels = ["APT", "SECTEAM", "OS", "VULNAME", "MAL", "FILE", "TOOL", "IP"]
        mapping = builtin_map("APTNER")
        for _ in range(500):
            tags = random_tag_sequence(rng, rng.randint(1, 12), source_labels)
            corpus = make_corpus([tags], name="APTNER", schema=set(source_labels))
            unified = unify_corpus(corpus, mapping)
            assert validate_bio2(unified.sentences[0]) == []
            assert unified.n_entity_tokens <= corpus.n_entity_tokens

    criterion("unification: exact builtin maps, valid + non-increasing output", body)


def test_dedup_leakage_on_fixtures():
    def body():
        from cynerkit.dedup import remove_overlap, sentence_key
        from cynerkit.unify import UnificationMap

        rng = random.Random(59)
        mapping = UnificationMap("FIX", {"A": "Malware"})
        for _ in range(100):
            vocab = [f"t{i}" for i in range(12)]
            train_texts = [
                [rng.choice(vocab) for _ in range(rng.randint(1, 4))] for _ in range(15)
            ]
            eval_texts = [
                [rng.choice(vocab) for _ in range(rng.randint(1, 4))] for _ in range(8)
            ]
            train = make_corpus(
                [["O"] * len(t) for t in train_texts], name="FIX", texts_lists=train_texts
            )
            eval_corpus = make_corpus(
                [["O"] * len(t) for t in eval_texts],
                name="FIX",
                split="dev",
                texts_lists=eval_texts,
            )
            import warnings

            from cynerkit.errors import EmptyTrainAfterDedup

            with warnings.catch_warnings():
                warnings.simplefilter("ignore", EmptyTrainAfterDedup)
                train_out, eval_out = prepare_pairing(train, eval_corpus, mapping, mapping)
                keys_train = {sentence_key(s) for s in train_out}
                keys_eval = {sentence_key(s) for s in eval_out}
                assert not (keys_train & keys_eval)
                again = remove_overlap(train_out, eval_out)
            assert again.sentences == train_out.sentences

    criterion("dedup/leakage: empty train/eval intersection + idempotent removal", body)


def test_jsd_pearson_properties():
    def body():
        rng = random.Random(4242)
        keys = list("abcdefghij")
        for _ in range(300):
            counts_p = {k: rng.randint(1, 40) for k in rng.sample(keys, rng.randint(1, 8))}
            counts_q = {k: rng.randint(1, 40) for k in rng.sample(keys, rng.randint(1, 8))}
            p = CategoricalDistribution.from_counts(counts_p)
            q = CategoricalDistribution.from_counts(counts_q)
            value = js_divergence(p, q)
            assert value == js_divergence(q, p)
            assert 0.0 <= value <= 1.0
            assert abs(value - direct_jsd(p.prob, q.prob)) < 1e-12
            assert js_divergence(p, p) == 0.0
            if p.prob != q.prob:
                assert value > 0.0
        for _ in range(200):
            n = rng.randint(3, 40)
            xs = [rng.uniform(-50, 50) for _ in range(n)]
            ys = [rng.uniform(-50, 50) for _ in range(n)]
            expected = statistics.correlation(xs, ys)
            assert abs(pearson(xs, ys).r - expected) < 1e-12

    criterion("JSD/Pearson property suite vs oracles (|diff| < 1e-12)", body)


def test_harness_determinism(tmp_path):
    def body():
        paths = build_experiment(tmp_path)
        config = load_config(paths["config"])
        out_a = tmp_path / "run_a"
        out_b = tmp_path / "run_b"
        write_cross_eval(run_cross_eval(config, paths["preds"]), out_a)
        write_cross_eval(run_cross_eval(config, paths["preds"]), out_b)
        names = sorted(p.name for p in out_a.iterdir())
        assert names == sorted(p.name for p in out_b.iterdir())
        assert len(names) >= 7
        for name in names:
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes(), name

    criterion("harness determinism: byte-identical cross-eval outputs", body)


# ---------------------------------------------------------------------------
# Dataset-dependent checks: run only when the real corpora are supplied.
# ---------------------------------------------------------------------------


def _load_real_train_sets():
    root = Path(DATASETS_DIR)
    descriptors = builtin_descriptors()
    corpora = {}
    corpora["APTNER"] = clean_aptner(
        read_raw_file(root / "aptner" / "train.txt"),
        descriptors["APTNER"].official_labels,
    )
    corpora["DNRTI"] = clean_dnrti(read_raw_file(root / "dnrti" / "train.txt"))
    corpora["ATTACKER"] = parse_attacker((root / "attacker" / "train.json").read_bytes())
    from cynerkit.ingest import read_conll_file

    corpora["CYNER"] = read_conll_file(root / "cyner" / "train.txt", "CYNER", "train")
    return corpora


@needs_datasets
def test_real_dataset_leakage_all_pairings():
    def body():
        from cynerkit.dedup import sentence_key

        corpora = _load_real_train_sets()
        maps = {m.dataset: m for m in builtin_maps()}
        names = list(corpora)
        for train_name in names:
            for eval_name in names:
                train_out, eval_out = prepare_pairing(
                    corpora[train_name], corpora[eval_name], maps[train_name], maps[eval_name]
                )
                keys = {sentence_key(s) for s in train_out}
                assert not keys & {sentence_key(s) for s in eval_out}

    criterion("real datasets: leakage-free on all 16 pairings", body)


@needs_datasets
def test_real_dataset_span_length_jsd_matrix():
    def body():
        started = time.perf_counter()
        corpora = _load_real_train_sets()
        maps = {m.dataset: m for m in builtin_maps()}
        unified = [unify_corpus(corpora[name], maps[name]) for name in
                   ("DNRTI", "ATTACKER", "APTNER", "CYNER")]
        matrix = divergence_matrix(unified, "span_length")
        reported = {
            ("DNRTI", "ATTACKER"): 0.23,
            ("DNRTI", "APTNER"): 0.04,
            ("DNRTI", "CYNER"): 0.05,
            ("ATTACKER", "APTNER"): 0.24,
            ("ATTACKER", "CYNER"): 0.19,
            ("APTNER", "CYNER"): 0.07,
        }
        for (a, b), expected in reported.items():
            assert math.isclose(matrix.cell(a, b), expected, abs_tol=0.03), (a, b)
        elapsed = time.perf_counter() - started
        assert elapsed < 120.0

    criterion("real datasets: span-length JSD matrix within +/-0.03", body)
