"""Information-theoretic dataset comparison.

Jensen-Shannon divergence over categorical relative-frequency
distributions, Pearson correlation between divergences and cross-dataset
performance. Log base 2 bounds JSD in [0, 1] and is the default; no
smoothing is applied since JSD handles zero-probability categories exactly.
"""

from __future__ import annotations

import json
import math
from collections.abc import Sequence
from dataclasses import dataclass

from .corpus import (
    Corpus,
    entity_label_distribution,
    pos_distribution,
    span_length_distribution,
    token_distribution,
)
from .distributions import CategoricalDistribution
from .errors import DegenerateInput

FEATURES = {
    "words": token_distribution,
    "pos": pos_distribution,
    "span_length": span_length_distribution,
    "entity_labels": entity_label_distribution,
}


def js_divergence(
    p: CategoricalDistribution,
    q: CategoricalDistribution,
    base: float = 2.0,
) -> float:
    """Jensen-Shannon divergence: JSD = KL(P||M)/2 + KL(Q||M)/2, M = (P+Q)/2.

    Supports may differ; missing keys carry probability 0 and 0*log(0)
    terms contribute nothing. Symmetric; bounded by log_base(2).
    """
    if base <= 1.0:
        raise ValueError("logarithm base must exceed 1")
    scale = 1.0 if base == 2.0 else 1.0 / math.log2(base)
    terms_p = []
    terms_q = []
    for key in p.support | q.support:
        pi = p[key]
        qi = q[key]
        mi = 0.5 * (pi + qi)
        if pi > 0.0:
            terms_p.append(pi * math.log2(pi / mi))
        if qi > 0.0:
            terms_q.append(qi * math.log2(qi / mi))
    jsd = scale * (0.5 * math.fsum(terms_p) + 0.5 * math.fsum(terms_q))
    # Floating-point roundoff can poke a hair past the mathematical bounds.
    return min(max(jsd, 0.0), scale)


@dataclass(frozen=True, slots=True)
class CorrelationResult:
    r: float
    n: int

    def __post_init__(self):
        if not -1.0 <= self.r <= 1.0:
            raise ValueError(f"correlation {self.r!r} outside [-1, 1]")
        if self.n < 2:
            raise ValueError("correlation needs at least 2 points")


def pearson(xs: Sequence[float], ys: Sequence[float]) -> CorrelationResult:
    """Sample Pearson coefficient, two-pass."""
    if len(xs) != len(ys):
        raise ValueError(f"length mismatch: {len(xs)} vs {len(ys)}")
    n = len(xs)
    if n < 2:
        raise DegenerateInput("need at least 2 paired points")
    mean_x = math.fsum(xs) / n
    mean_y = math.fsum(ys) / n
    cov = math.fsum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    var_x = math.fsum((x - mean_x) ** 2 for x in xs)
    var_y = math.fsum((y - mean_y) ** 2 for y in ys)
    if var_x == 0.0 or var_y == 0.0:
        raise DegenerateInput("zero variance in at least one input")
    product = var_x * var_y
    if product > 0.0 and math.isfinite(product):
        denominator = math.sqrt(product)
    else:
        # the product under/overflowed; splitting the roots keeps it finite
        denominator = math.sqrt(var_x) * math.sqrt(var_y)
    if denominator == 0.0 or not math.isfinite(denominator):
        raise DegenerateInput("variance under/overflow")
    r = cov / denominator
    return CorrelationResult(min(max(r, -1.0), 1.0), n)


@dataclass(frozen=True)
class DivergenceMatrix:
    """Symmetric pairwise JSD matrix with a zero diagonal."""

    names: tuple[str, ...]
    values: tuple[tuple[float, ...], ...]

    def cell(self, a: str, b: str) -> float:
        return self.values[self.names.index(a)][self.names.index(b)]

    def to_csv(self) -> str:
        header = "dataset," + ",".join(self.names)
        rows = [
            f"{name}," + ",".join(format(v, ".12g") for v in row)
            for name, row in zip(self.names, self.values)
        ]
        return "\n".join([header, *rows]) + "\n"

    def to_json(self) -> str:
        payload = {
            "names": list(self.names),
            "values": [list(row) for row in self.values],
        }
        return json.dumps(payload, indent=2) + "\n"


def divergence_matrix(
    corpora: Sequence[Corpus],
    feature: str,
    base: float = 2.0,
) -> DivergenceMatrix:
    """Pairwise JSD between corpora over one feature distribution.

    feature is one of "words", "pos", "span_length", "entity_labels".
    Each pair is computed once; the diagonal is exactly 0.
    """
    try:
        extractor = FEATURES[feature]
    except KeyError:
        raise ValueError(f"unknown feature {feature!r}; expected one of {sorted(FEATURES)}") from None
    distributions = [extractor(corpus) for corpus in corpora]
    n = len(corpora)
    values = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            d = js_divergence(distributions[i], distributions[j], base=base)
            values[i][j] = d
            values[j][i] = d
    return DivergenceMatrix(
        tuple(c.name for c in corpora),
        tuple(tuple(row) for row in values),
    )


def correlate_divergence_with_performance(
    div: DivergenceMatrix,
    performance,
    include_diagonal: bool = False,
) -> CorrelationResult:
    """Pearson correlation between JSD(i, j) and F1(train=i, eval=j).

    ``performance`` is an EvalMatrix or a {(train, eval): f1} dict. Pairs
    range over ordered (i, j) with i != j (12 points for 4 datasets) unless
    include_diagonal is set. Dataset ordering must match.
    """
    if hasattr(performance, "f1_cells"):
        if tuple(performance.train_names) != div.names or tuple(performance.eval_names) != div.names:
            raise ValueError("divergence and evaluation matrices index different datasets")
        f1_cells = performance.f1_cells()
    else:
        f1_cells = dict(performance)
    names = div.names
    for i in names:
        for j in names:
            if (i != j or include_diagonal) and (i, j) not in f1_cells:
                raise ValueError(f"missing F1 cell for pairing ({i}, {j})")
    xs = []
    ys = []
    for i in names:
        for j in names:
            if i == j and not include_diagonal:
                continue
            xs.append(div.cell(i, j))
            ys.append(f1_cells[(i, j)])
    return pearson(xs, ys)
