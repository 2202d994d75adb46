"""Statistical certification helpers.

Total variation distance, uniformity and lag-1 independence statistics, and
the attempts-to-acceptance curve with its geometric reference.  Chi-square
critical values are embedded as a static table (df 1..64 at the 5% and 1%
levels) so hypothesis checks need no runtime quantile computation.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass


class EmptySample(Exception):
    pass


class DegenerateTable(Exception):
    """Contingency table has a single row or column; independence undefined."""


_CHI2_95 = (
    3.8415, 5.9915, 7.8147, 9.4877, 11.0705, 12.5916, 14.0671, 15.5073,
    16.9190, 18.3070, 19.6751, 21.0261, 22.3620, 23.6848, 24.9958, 26.2962,
    27.5871, 28.8693, 30.1435, 31.4104, 32.6706, 33.9244, 35.1725, 36.4150,
    37.6525, 38.8851, 40.1133, 41.3371, 42.5570, 43.7730, 44.9853, 46.1943,
    47.3999, 48.6024, 49.8018, 50.9985, 52.1923, 53.3835, 54.5722, 55.7585,
    56.9424, 58.1240, 59.3035, 60.4809, 61.6562, 62.8296, 64.0011, 65.1708,
    66.3386, 67.5048, 68.6693, 69.8322, 70.9935, 72.1532, 73.3115, 74.4683,
    75.6237, 76.7778, 77.9305, 79.0819, 80.2321, 81.3810, 82.5287, 83.6753,
)
_CHI2_99 = (
    6.6349, 9.2103, 11.3449, 13.2767, 15.0863, 16.8119, 18.4753, 20.0902,
    21.6660, 23.2093, 24.7250, 26.2170, 27.6882, 29.1412, 30.5779, 31.9999,
    33.4087, 34.8053, 36.1909, 37.5662, 38.9322, 40.2894, 41.6384, 42.9798,
    44.3141, 45.6417, 46.9629, 48.2782, 49.5879, 50.8922, 52.1914, 53.4858,
    54.7755, 56.0609, 57.3421, 58.6192, 59.8925, 61.1621, 62.4281, 63.6907,
    64.9501, 66.2062, 67.4593, 68.7095, 69.9568, 71.2014, 72.4433, 73.6826,
    74.9195, 76.1539, 77.3860, 78.6158, 79.8433, 81.0688, 82.2921, 83.5134,
    84.7328, 85.9502, 87.1657, 88.3794, 89.5913, 90.8015, 92.0100, 93.2169,
)


def chi2_critical(df: int, level: float) -> float:
    """Critical value from the embedded table; level is 0.05 or 0.01, df <= 64."""
    if not 1 <= df <= 64:
        raise ValueError(f"df {df} outside table range 1..64")
    if level == 0.05:
        return _CHI2_95[df - 1]
    if level == 0.01:
        return _CHI2_99[df - 1]
    raise ValueError("tabulated levels are 0.05 and 0.01")


@dataclass
class EmpiricalDist:
    counts: dict
    total: int

    @classmethod
    def from_samples(cls, samples) -> "EmpiricalDist":
        counts = Counter(samples)
        return cls(dict(counts), sum(counts.values()))

    def probs(self) -> dict:
        if self.total == 0:
            raise EmptySample("no observations")
        return {k: v / self.total for k, v in self.counts.items()}


def _as_probs(dist) -> dict:
    if isinstance(dist, EmpiricalDist):
        return dist.probs()
    total = float(sum(dist.values()))
    if total <= 0:
        raise EmptySample("distribution has zero mass")
    return {k: v / total for k, v in dist.items()}


def tv_distance(p, q) -> float:
    """Total variation distance: half the L1 distance between normalized
    distributions over the union of their supports."""
    pp, qq = _as_probs(p), _as_probs(q)
    support = set(pp) | set(qq)
    return 0.5 * sum(abs(pp.get(k, 0.0) - qq.get(k, 0.0)) for k in support)


def tv_distance_subset_oracle(p, q) -> float:
    """Brute-force max_S |P(S) - Q(S)| over all events; domains up to ~12 values."""
    pp, qq = _as_probs(p), _as_probs(q)
    support = sorted(set(pp) | set(qq), key=repr)
    if len(support) > 16:
        raise ValueError("subset oracle limited to small domains")
    best = 0.0
    for mask in range(1 << len(support)):
        ps = sum(pp.get(support[i], 0.0) for i in range(len(support)) if mask >> i & 1)
        qs = sum(qq.get(support[i], 0.0) for i in range(len(support)) if mask >> i & 1)
        best = max(best, abs(ps - qs))
    return best


def chi_square_uniform(counts) -> float:
    """Pearson statistic against the uniform null over the given categories."""
    values = list(counts.values()) if isinstance(counts, dict) else list(counts)
    if len(values) < 2:
        raise EmptySample("need at least 2 categories")
    total = sum(values)
    if total == 0:
        raise EmptySample("no observations")
    expected = total / len(values)
    return sum((o - expected) ** 2 / expected for o in values)


def lag_independence(samples) -> float:
    """Chi-square independence statistic of the lag-1 contingency table.

    Built from consecutive pairs (s_i, s_{i+1}); raises DegenerateTable when
    either margin has a single category.
    """
    samples = list(samples)
    if len(samples) < 2:
        raise EmptySample("need at least 2 samples")
    pairs = Counter(zip(samples[:-1], samples[1:]))
    rows = sorted({a for a, _ in pairs}, key=repr)
    cols = sorted({b for _, b in pairs}, key=repr)
    if len(rows) < 2 or len(cols) < 2:
        raise DegenerateTable("lag-1 table has a single row or column")
    n = sum(pairs.values())
    row_tot = {a: sum(v for (x, _), v in pairs.items() if x == a) for a in rows}
    col_tot = {b: sum(v for (_, y), v in pairs.items() if y == b) for b in cols}
    stat = 0.0
    for a in rows:
        for b in cols:
            expected = row_tot[a] * col_tot[b] / n
            observed = pairs.get((a, b), 0)
            stat += (observed - expected) ** 2 / expected
    return stat


def lag_independence_df(samples) -> int:
    samples = list(samples)
    pairs = set(zip(samples[:-1], samples[1:]))
    rows = {a for a, _ in pairs}
    cols = {b for _, b in pairs}
    return (len(rows) - 1) * (len(cols) - 1)


def acceptance_curve(attempt_counts) -> list[tuple[int, float, float]]:
    """Empirical CDF of attempts-to-acceptance.

    Rows are (k, empirical P(accepted by attempt k), 1 - (3/4)^k reference).
    """
    attempts = list(attempt_counts)
    if not attempts:
        raise EmptySample("no attempt counts")
    n = len(attempts)
    kmax = max(attempts)
    rows = []
    for k in range(1, kmax + 1):
        frac = sum(1 for a in attempts if a <= k) / n
        rows.append((k, frac, 1.0 - 0.75 ** k))
    return rows
