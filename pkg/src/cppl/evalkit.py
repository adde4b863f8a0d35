"""Evaluation metrics: the unbiased pass@k estimator and geometric-mean
aggregation of externally measured synthesis node counts.

pass@k for one problem with n samples of which c pass is
1 - C(n-c, k) / C(n, k); the reported figure is the mean over problems,
computed with exact integer binomials (no floating-point factorials) and
converted to float at the end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence


@dataclass(frozen=True, slots=True)
class ProblemOutcomes:
    id: str
    n: int
    c: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"{self.id}: n must be >= 1, got {self.n}")
        if not 0 <= self.c <= self.n:
            raise ValueError(f"{self.id}: need 0 <= c <= n, got c={self.c}, n={self.n}")


def outcomes_from_json(value: object) -> list[ProblemOutcomes]:
    """Ingest the wire format: a JSON list of {"id", "n", "c"}."""
    if not isinstance(value, list):
        raise ValueError("outcomes must be a JSON array of {id, n, c} objects")
    out = []
    for i, entry in enumerate(value):
        if not isinstance(entry, dict) or "n" not in entry or "c" not in entry:
            raise ValueError(f"outcomes[{i}]: expected an object with n and c")
        out.append(ProblemOutcomes(str(entry.get("id", i)), entry["n"], entry["c"]))
    return out


def pass_at_k(outcomes: Sequence[ProblemOutcomes], k: int) -> float:
    if k < 1:
        raise ValueError("k must be >= 1")
    if not outcomes:
        raise ValueError("EMPTY_LIST: no problem outcomes")
    total = Fraction(0)
    for p in outcomes:
        if k > p.n:
            raise ValueError(f"K_EXCEEDS_N: k={k} exceeds n={p.n} for problem {p.id!r}")
        total += 1 - Fraction(math.comb(p.n - p.c, k), math.comb(p.n, k))
    return float(total / len(outcomes))


def geo_mean(values: Iterable[float]) -> float:
    values = list(values)
    if not values:
        raise ValueError("EMPTY_LIST: geometric mean of no values")
    for v in values:
        if v <= 0:
            raise ValueError(f"NONPOSITIVE_VALUE: geometric mean requires positive values, got {v}")
    return math.exp(math.fsum(math.log(v) for v in values) / len(values))


def counts_from_json(value: object) -> list[float]:
    """Ingest node counts: {"design": count} (sorted by name) or a bare list."""
    if isinstance(value, Mapping):
        return [value[k] for k in sorted(value)]
    if isinstance(value, list):
        return list(value)
    raise ValueError("counts must be a JSON object {design: count} or an array")
