"""Exact stratum probabilities, variances and efficiency under perfect ranking.

Everything here is closed-form or exhaustive: no simulation. Probabilities
are carried in whatever numeric type ``p`` comes in as, so passing a
``fractions.Fraction`` gives exact rational arithmetic end to end, while a
float stays in double precision (the convolution is a plain sum-product, so
the accumulated error is far below 1e-12 per step for the set sizes used
here, m <= ~10).

Why the enumerator may sort by response alone
---------------------------------------------
Perfect ranking of binary values leaves ties among equal responses, broken
at random. For any set of 0/1 values, the sorted *value* at each position is
the same for every tie-break (ties are between equal values), so the
measured value of the rank-i unit -- and therefore every later stage, which
again only looks at values under perfect ranking -- does not depend on how
ties were resolved. Likewise, the "random division" of iid with-replacement
units into sets is an exchangeable relabeling and leaves the joint law of
the selected values unchanged. The brute-force enumerator therefore fixes
the unit order and sorts deterministically, which integrates both sources
of randomness out exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Sequence, Union

from .estimate import EfficiencyReport, efficiency_report

Number = Union[float, Fraction]

#: enumerating 2**units outcomes; 2**20 is ~1M procedure runs
MAX_BRUTE_FORCE_UNITS = 20


@dataclass(frozen=True)
class ExactStrata:
    """Exact success probabilities of the m judgment strata at stage r.

    ``probs[i-1]`` is the probability that the rank-i measured unit equals 1.
    Under perfect ranking the vector is nondecreasing and averages to the
    population proportion exactly.
    """

    p: Number
    m: int
    r: int
    probs: tuple[Number, ...]

    def __post_init__(self):
        if len(self.probs) != self.m:
            raise ValueError(f"expected {self.m} stratum probabilities, got {len(self.probs)}")

    def mean(self) -> Number:
        return sum(self.probs) / self.m

    def as_floats(self) -> list[float]:
        return [float(q) for q in self.probs]


def stage1_strata(p: Number, m: int) -> ExactStrata:
    """Strata after one ranking stage: order statistics of m iid Bernoulli(p).

    The rank-i value (ascending) is 1 exactly when at least m - i + 1 of the
    m units are successes, so probs[i-1] = P(Binomial(m, p) >= m - i + 1).
    """
    if isinstance(p, float) and not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if m < 1:
        raise ValueError("set size must be >= 1")
    q = 1 - p
    pmf = [comb(m, j) * p**j * q ** (m - j) for j in range(m + 1)]
    probs = tuple(sum(pmf[m - i + 1 :]) for i in range(1, m + 1))
    return ExactStrata(p=p, m=m, r=1, probs=probs)


def poisson_binomial_pmf(probs: Sequence[Number]) -> list[Number]:
    """PMF of a sum of independent Bernoulli(probs[t]) variables, by the
    standard O(m^2) dynamic-programming convolution."""
    zero = probs[0] * 0 if probs else 0
    pmf: list[Number] = [zero + 1]
    for q in probs:
        nxt = [v * (1 - q) for v in pmf] + [zero]
        for j, v in enumerate(pmf):
            nxt[j + 1] += v * q
        pmf = nxt
    return pmf


def poisson_binomial_tail(probs: Sequence[Number], k: int) -> Number:
    """P(sum of independent Bernoulli(probs[t]) >= k)."""
    for q in probs:
        if isinstance(q, float) and not 0.0 <= q <= 1.0:
            raise ValueError(f"probabilities must lie in [0, 1], got {q}")
    if k < 0 or k > len(probs) + 1:
        raise ValueError(f"tail threshold {k} out of range for {len(probs)} variables")
    if k <= 0:
        return probs[0] * 0 + 1 if probs else 1
    pmf = poisson_binomial_pmf(probs)
    zero = probs[0] * 0 if probs else 0
    return sum(pmf[k:], zero)


def msrss_strata(p: Number, m: int, r: int) -> ExactStrata:
    """Exact strata after r ranking stages under perfect ranking.

    The stage-r rank-i variable is distributed as the i-th order statistic
    of m independent Bernoulli variables whose success probabilities are
    the stage-(r-1) strata, so each stage is one Poisson-binomial tail per
    rank, starting from the single-stage order statistics.
    """
    if r < 1:
        raise ValueError("stage count must be >= 1")
    strata = stage1_strata(p, m)
    probs = strata.probs
    for _ in range(r - 1):
        pmf = poisson_binomial_pmf(probs)
        zero = probs[0] * 0
        probs = tuple(sum(pmf[m - i + 1 :], zero) for i in range(1, m + 1))
    return ExactStrata(p=p, m=m, r=r, probs=probs)


def exact_efficiency(p: Number, m: int, r: int) -> EfficiencyReport:
    """Exact efficiency report comparing the staged design against SRS.

    Uses one cycle (the ratio is invariant to the cycle count): the SRS
    variance is p(1-p)/m and the design variance comes from the exact
    strata. At p in {0, 1} both variances vanish and the report is flagged
    degenerate.
    """
    pf = float(p)
    if not 0.0 <= pf <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    var_srs = pf * (1.0 - pf) / m
    strata = msrss_strata(p, m, r)
    var_design = float(sum(q * (1 - q) for q in strata.probs)) / m**2
    return efficiency_report(var_srs, var_design, provenance="exact")


def _select_stage(rows: list[tuple[int, ...]], m: int) -> list[tuple[int, ...]]:
    # one ranking-and-selection pass: consecutive groups of m sets; the new
    # set's rank-k element is the k-th smallest value of the group's k-th set
    out = []
    for g in range(len(rows) // m):
        group = rows[g * m : (g + 1) * m]
        out.append(tuple(sorted(group[k])[k] for k in range(m)))
    return out


def brute_force_enumerate(p: Number, m: int, r: int, max_units: int = MAX_BRUTE_FORCE_UNITS) -> ExactStrata:
    """Independent oracle: run the staged selection over every binary
    assignment to the m**(r+1) identified units, weighting each assignment
    by p^(#1s) (1-p)^(#0s).

    Shares no code with the recursion in :func:`msrss_strata`; agreement of
    the two (exact, when ``p`` is a Fraction) validates the stage recursion.
    The tie-break and random-division randomness integrate out by
    exchangeability (see the module docstring), so the procedure is run
    once per assignment with a fixed unit order and deterministic sorting.
    """
    units = m ** (r + 1)
    if units > max_units:
        raise ValueError(
            f"enumeration over 2**{units} outcomes refused (guard: m**(r+1) <= {max_units})"
        )
    weight_by_ones = [p**k * (1 - p) ** (units - k) for k in range(units + 1)]
    sums: list[Number] = [p * 0] * m
    for pattern in range(2**units):
        bits = [(pattern >> t) & 1 for t in range(units)]
        w = weight_by_ones[sum(bits)]
        rows = [tuple(bits[i * m : (i + 1) * m]) for i in range(units // m)]
        for _ in range(r):
            rows = _select_stage(rows, m)
        for i, v in enumerate(rows[0]):
            if v:
                sums[i] += w
    return ExactStrata(p=p, m=m, r=r, probs=tuple(sums))
