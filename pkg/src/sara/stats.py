"""Nonparametric and parametric test kernel.

Every inferential procedure the analysis layer reports goes through this
module: Wilcoxon signed-rank, Mann-Whitney U, Kruskal-Wallis H, one-way
ANOVA, Bonferroni adjustment, and Cohen's kappa. Exact small-sample null
distributions are computed by convolution (equivalent to full enumeration
of sign patterns / rank splits); larger samples use the tie-corrected
normal or chi-square approximations with an optional continuity
correction. Each result records which variant produced it in
``variant_notes`` so conformance mismatches stay diagnosable.

Distribution tails come from :mod:`sara.special`; there is no external
statistics dependency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .special import chi2_sf, f_sf, normal_sf

WILCOXON_EXACT_LIMIT = 25   # max n for the exact signed-rank distribution
MWU_EXACT_LIMIT = 8         # max min(n1, n2) for the exact rank-split distribution


@dataclass(frozen=True)
class StatTestResult:
    """Outcome of one statistical test.

    ``df`` is a single integer for Kruskal-Wallis, an (among, within) pair
    for ANOVA, and None where degrees of freedom do not apply. ``p_value``
    is None for Cohen's kappa, which is a coefficient, not a test.
    """

    method: str
    statistic: float
    p_value: float | None
    df: int | tuple[int, int] | None = None
    variant_notes: str = ""

    def as_dict(self) -> dict:
        df = list(self.df) if isinstance(self.df, tuple) else self.df
        return {
            "method": self.method,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "df": df,
            "variant_notes": self.variant_notes,
        }


def _rank_average(values: Sequence[float]) -> tuple[list[float], list[int]]:
    """Average ranks (1-based) and the sizes of tie groups."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    ties: list[int] = []
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j + 2) / 2.0  # mean of 1-based positions i+1 .. j+1
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        ties.append(j - i + 1)
        i = j + 1
    return ranks, ties


def _tie_term(ties: Sequence[int]) -> float:
    return float(sum(t ** 3 - t for t in ties))


def _signed_rank_counts(n: int) -> list[int]:
    """Null distribution of W+ for n tie-free pairs.

    counts[w] = number of sign patterns with rank-sum w; identical to
    enumerating all 2**n sign assignments over ranks 1..n.
    """
    max_sum = n * (n + 1) // 2
    counts = [0] * (max_sum + 1)
    counts[0] = 1
    for r in range(1, n + 1):
        for w in range(max_sum, r - 1, -1):
            counts[w] += counts[w - r]
    return counts


def _rank_split_counts(n1: int, n2: int) -> list[int]:
    """Null distribution of U for a tie-free (n1, n2) split.

    counts[u] = number of ways to choose n1 of the pooled ranks 1..n1+n2
    with U statistic u (the Gaussian binomial coefficient), built by
    polynomial multiplication/division; identical to enumerating all
    C(n1+n2, n1) rank splits.
    """
    size = n1 * n2 + 1
    coeff = [0] * size
    coeff[0] = 1
    deg = 0
    for i in range(1, n1 + 1):
        # multiply by (1 - q**(n2 + i))
        hi = n2 + i
        deg = min(size - 1, deg + hi)
        for j in range(deg, hi - 1, -1):
            coeff[j] -= coeff[j - hi]
        # divide by (1 - q**i)
        for j in range(i, deg + 1):
            coeff[j] += coeff[j - i]
    return coeff


def _two_sided_from_counts(counts: Sequence[int], stat: float) -> float:
    """Two-sided p for a symmetric discrete null: 2 * P(S <= stat), capped."""
    total = float(sum(counts))
    w = int(math.floor(stat + 1e-9))
    lower = sum(counts[: w + 1])
    return min(1.0, 2.0 * lower / total)


def wilcoxon_signed_rank(
    x: Sequence[float],
    y: Sequence[float],
    mode: str = "auto",
    continuity: bool = True,
) -> StatTestResult:
    """Paired two-sided Wilcoxon signed-rank test.

    Zero differences are dropped (Wilcoxon's rule); |differences| are
    ranked with average ranks for ties; the statistic is W = min(W+, W-),
    so the result is symmetric in the argument order. ``mode`` selects the
    exact distribution (n <= 25, no ties among |d|), the tie-corrected
    normal approximation, or automatic choice between them.
    """
    if len(x) != len(y) or not x:
        raise ValueError("x and y must be equal-length, non-empty sequences")
    if mode not in ("auto", "exact", "approx"):
        raise ValueError(f"unknown mode: {mode!r}")

    diffs = [float(a) - float(b) for a, b in zip(x, y)]
    nonzero = [d for d in diffs if d != 0.0]
    n_zero = len(diffs) - len(nonzero)
    notes = []
    if n_zero:
        notes.append(f"{n_zero} zero difference(s) dropped")

    if not nonzero:
        notes.append("degenerate: all differences zero")
        return StatTestResult("wilcoxon_sr", 0.0, 1.0, None, "; ".join(notes))

    n = len(nonzero)
    abs_d = [abs(d) for d in nonzero]
    ranks, ties = _rank_average(abs_d)
    w_plus = sum(r for r, d in zip(ranks, nonzero) if d > 0)
    w_minus = sum(r for r, d in zip(ranks, nonzero) if d < 0)
    w = min(w_plus, w_minus)

    has_ties = len(ties) < n
    want_exact = mode == "exact" or (mode == "auto" and n <= WILCOXON_EXACT_LIMIT and not has_ties)
    if want_exact and has_ties:
        notes.append("exact requested but |d| ties present; normal approximation used")
        want_exact = False

    if want_exact:
        p = _two_sided_from_counts(_signed_rank_counts(n), w)
        notes.append(f"exact signed-rank distribution (n={n})")
        return StatTestResult("wilcoxon_sr", w, p, None, "; ".join(notes))

    mean = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0 - _tie_term(ties) / 48.0
    if var <= 0:
        notes.append("degenerate: zero variance")
        return StatTestResult("wilcoxon_sr", w, 1.0, None, "; ".join(notes))
    num = abs(w - mean)
    if continuity:
        num = max(0.0, num - 0.5)
    z = num / math.sqrt(var)
    p = min(1.0, 2.0 * normal_sf(z))
    notes.append(
        "normal approximation, tie-corrected variance"
        + (", continuity correction" if continuity else ", no continuity correction")
    )
    return StatTestResult("wilcoxon_sr", w, p, None, "; ".join(notes))


def mann_whitney_u(
    a: Sequence[float],
    b: Sequence[float],
    mode: str = "auto",
    continuity: bool = True,
) -> StatTestResult:
    """Two-sided Mann-Whitney U test with U = min(U1, U2).

    Exact rank-split distribution when min(|a|, |b|) <= 8 and no value
    occurs in both groups; otherwise the normal approximation with tie
    correction and (by default) continuity correction.
    """
    if not a or not b:
        raise ValueError("both samples must be non-empty")
    if mode not in ("auto", "exact", "approx"):
        raise ValueError(f"unknown mode: {mode!r}")

    n1, n2 = len(a), len(b)
    pooled = [float(v) for v in a] + [float(v) for v in b]
    ranks, ties = _rank_average(pooled)
    r1 = sum(ranks[:n1])
    u1 = r1 - n1 * (n1 + 1) / 2.0
    u2 = n1 * n2 - u1
    u = min(u1, u2)

    cross_ties = bool(set(a) & set(b))
    notes = []
    want_exact = mode == "exact" or (mode == "auto" and min(n1, n2) <= MWU_EXACT_LIMIT and not cross_ties)
    if want_exact and cross_ties:
        notes.append("exact requested but cross-group ties present; normal approximation used")
        want_exact = False

    if want_exact:
        p = _two_sided_from_counts(_rank_split_counts(n1, n2), u)
        notes.append(f"exact rank-split distribution (n1={n1}, n2={n2})")
        return StatTestResult("mann_whitney", u, p, None, "; ".join(notes))

    mean = n1 * n2 / 2.0
    n = n1 + n2
    var = n1 * n2 / 12.0 * ((n + 1) - _tie_term(ties) / (n * (n - 1)))
    if var <= 0:
        notes.append("degenerate: zero variance")
        return StatTestResult("mann_whitney", u, 1.0, None, "; ".join(notes))
    num = abs(u - mean)
    if continuity:
        num = max(0.0, num - 0.5)
    z = num / math.sqrt(var)
    p = min(1.0, 2.0 * normal_sf(z))
    notes.append(
        "normal approximation, tie-corrected variance"
        + (", continuity correction" if continuity else ", no continuity correction")
    )
    return StatTestResult("mann_whitney", u, p, None, "; ".join(notes))


def bonferroni(p_values: Sequence[float]) -> list[float]:
    """Bonferroni adjustment: p' = min(1, p * m) with m = len(p_values)."""
    for p in p_values:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"p-value out of range: {p}")
    m = len(p_values)
    return [min(1.0, p * m) for p in p_values]


def kruskal_wallis(groups: Sequence[Sequence[float]]) -> StatTestResult:
    """Kruskal-Wallis H test over two or more groups.

    Average ranks for ties; tie-corrected H; p from the chi-square
    approximation with k-1 degrees of freedom.
    """
    if len(groups) < 2 or any(len(g) == 0 for g in groups):
        raise ValueError("need at least two non-empty groups")
    k = len(groups)
    sizes = [len(g) for g in groups]
    pooled = [float(v) for g in groups for v in g]
    n = len(pooled)
    ranks, ties = _rank_average(pooled)

    tie_term = _tie_term(ties)
    divisor = 1.0 - tie_term / (n ** 3 - n)
    if divisor <= 0.0:
        return StatTestResult(
            "kruskal_wallis", 0.0, 1.0, k - 1,
            "degenerate: all pooled values identical",
        )

    h = 0.0
    pos = 0
    for size in sizes:
        r = sum(ranks[pos: pos + size])
        h += r * r / size
        pos += size
    h = 12.0 / (n * (n + 1)) * h - 3.0 * (n + 1)
    h /= divisor
    h = max(0.0, h)
    p = chi2_sf(h, k - 1)
    notes = "average ranks, tie correction applied, chi-square approximation"
    if tie_term == 0:
        notes = "average ranks, no ties, chi-square approximation"
    return StatTestResult("kruskal_wallis", h, p, k - 1, notes)


def anova_oneway(groups: Sequence[Sequence[float]]) -> StatTestResult:
    """One-way ANOVA F test.

    F = MS_between / MS_within with df (k-1, N-k); p from the F
    distribution. Zero within-group variance with distinct means is
    flagged as infinite F with p = 0.
    """
    if len(groups) < 2 or any(len(g) == 0 for g in groups):
        raise ValueError("need at least two non-empty groups")
    k = len(groups)
    n = sum(len(g) for g in groups)
    if n <= k:
        raise ValueError("need more observations than groups")

    grand = math.fsum(v for g in groups for v in g) / n
    ss_between = math.fsum(len(g) * (math.fsum(g) / len(g) - grand) ** 2 for g in groups)
    ss_within = math.fsum(
        math.fsum((v - math.fsum(g) / len(g)) ** 2 for v in g) for g in groups
    )
    df = (k - 1, n - k)
    ms_between = ss_between / df[0]
    ms_within = ss_within / df[1]

    if ms_within == 0.0:
        if ms_between == 0.0:
            return StatTestResult("anova", 0.0, 1.0, df, "degenerate: zero variance everywhere")
        return StatTestResult(
            "anova", math.inf, 0.0, df,
            "infinite F: zero within-group variance with distinct group means",
        )
    f = ms_between / ms_within
    return StatTestResult("anova", f, f_sf(f, *df), df, "F distribution")


def cohens_kappa(a: Sequence[str], b: Sequence[str]) -> StatTestResult:
    """Cohen's kappa agreement coefficient between two label sequences."""
    if len(a) != len(b):
        raise ValueError("label sequences must have equal length")
    if not a:
        raise ValueError("label sequences must be non-empty")
    n = len(a)
    p_obs = sum(1 for la, lb in zip(a, b) if la == lb) / n
    labels = set(a) | set(b)
    count_a = {lab: 0 for lab in labels}
    count_b = {lab: 0 for lab in labels}
    for la in a:
        count_a[la] += 1
    for lb in b:
        count_b[lb] += 1
    p_exp = sum(count_a[lab] * count_b[lab] for lab in labels) / (n * n)

    if p_exp == 1.0:
        kappa = 1.0 if p_obs == 1.0 else 0.0
        return StatTestResult(
            "kappa", kappa, None, None,
            "degenerate: expected agreement is 1 (single marginal label)",
        )
    kappa = (p_obs - p_exp) / (1.0 - p_exp)
    return StatTestResult("kappa", kappa, None, None, "marginal-product expected agreement")
