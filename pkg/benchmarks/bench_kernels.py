#!/usr/bin/env python3
"""Benchmark the compiled tag kernels against the pure-Python fallback.

Generates a synthetic corpus of noisy BIO2 sequences and times the three
hot operations (validation, repair, span decoding) under both backends.

Usage: python benchmarks/bench_kernels.py [--tokens N] [--repeats K]
"""

import argparse
import random
import time

from cynerkit._kernels import _pykernels

try:
    from cynerkit._kernels import _ckernels
except ImportError:
    _ckernels = None

LABELS = ["Organization", "System", "Vulnerability", "Malware"]


def synth_sentences(total_tokens: int, seed: int = 7) -> list[list[str]]:
    rng = random.Random(seed)
    sentences = []
    produced = 0
    while produced < total_tokens:
        length = rng.randint(5, 40)
        tags = []
        for _ in range(length):
            roll = rng.random()
            if roll < 0.7:
                tags.append("O")
            elif roll < 0.85:
                tags.append("B-" + rng.choice(LABELS))
            else:
                tags.append("I-" + rng.choice(LABELS))
        sentences.append(tags)
        produced += length
    return sentences


def bench(impl, sentences, repeats):
    timings = {}
    repaired = [impl.bio2_repair(tags) for tags in sentences]

    def time_op(name, fn, data):
        best = float("inf")
        for _ in range(repeats):
            started = time.perf_counter()
            for tags in data:
                fn(tags)
            best = min(best, time.perf_counter() - started)
        timings[name] = best

    time_op("validate", impl.bio2_violations, sentences)
    time_op("repair", impl.bio2_repair, sentences)
    time_op("decode", impl.decode_spans, repaired)
    return timings


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--tokens", type=int, default=1_000_000)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    sentences = synth_sentences(args.tokens)
    n_tokens = sum(len(s) for s in sentences)
    print(f"synthetic corpus: {len(sentences)} sentences, {n_tokens} tokens\n")

    python_times = bench(_pykernels, sentences, args.repeats)
    cython_times = bench(_ckernels, sentences, args.repeats) if _ckernels else None

    header = f"{'op':<10} {'python':>10} {'cython':>10} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for op, py_time in python_times.items():
        if cython_times:
            cy_time = cython_times[op]
            print(f"{op:<10} {py_time:>9.3f}s {cy_time:>9.3f}s {py_time / cy_time:>8.1f}x")
        else:
            print(f"{op:<10} {py_time:>9.3f}s {'n/a':>10} {'n/a':>9}")
    if not cython_times:
        print("\ncompiled backend not built; run `python setup.py build_ext --inplace`")


if __name__ == "__main__":
    main()
