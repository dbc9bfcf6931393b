"""Two-group ANOVA, Cohen's d, point-biserial and Spearman correlation, top-k ranking."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special
from scipy.stats import rankdata

from .errors import ConstantSequence, DegenerateData, InsufficientSamples, LengthMismatch, SingleClass


@dataclass(frozen=True)
class StatResult:
    statistic: float
    p_value: float | None
    n_a: int
    n_b: int
    effect_size: float | None = None


def _as_sample(x, name) -> np.ndarray:
    arr = np.asarray(x, dtype=float).ravel()
    if arr.size < 2:
        raise InsufficientSamples(f"{name} needs at least 2 observations, got {arr.size}")
    return arr


def f_sf(f: float, dfn: float, dfd: float) -> float:
    """Upper tail of the F distribution via the regularized incomplete beta."""
    if f <= 0:
        return 1.0
    if math.isinf(f):
        return 0.0
    # evaluate on whichever side keeps the beta argument away from 1
    y = dfn * f / (dfn * f + dfd)
    if y < 0.5:
        return float(special.betaincc(dfn / 2.0, dfd / 2.0, y))
    return float(special.betainc(dfd / 2.0, dfn / 2.0, dfd / (dfd + dfn * f)))


def one_way_anova(a, b) -> StatResult:
    """Classical (pooled-variance) one-way ANOVA for exactly two groups."""
    a, b = _as_sample(a, "a"), _as_sample(b, "b")
    na, nb = a.size, b.size
    grand = np.concatenate([a, b]).mean()
    ss_between = na * (a.mean() - grand) ** 2 + nb * (b.mean() - grand) ** 2
    ss_within = ((a - a.mean()) ** 2).sum() + ((b - b.mean()) ** 2).sum()
    df_within = na + nb - 2
    if ss_within == 0:
        if ss_between == 0:
            raise DegenerateData("both groups constant and equal; F undefined")
        return StatResult(math.inf, 0.0, na, nb)
    f = float(ss_between / (ss_within / df_within))
    return StatResult(f, f_sf(f, 1, df_within), na, nb)


def pooled_sd(a, b) -> float:
    a, b = _as_sample(a, "a"), _as_sample(b, "b")
    na, nb = a.size, b.size
    var = ((na - 1) * a.var(ddof=1) + (nb - 1) * b.var(ddof=1)) / (na + nb - 2)
    return math.sqrt(var)


def cohens_d(a, b) -> float:
    """Standardised mean difference, positive when ``b`` exceeds ``a``."""
    s = pooled_sd(a, b)
    if s == 0:
        raise DegenerateData("pooled variance is zero")
    return float((np.mean(b) - np.mean(a)) / s)


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    xc, yc = x - x.mean(), y - y.mean()
    denom = math.sqrt(float(xc @ xc) * float(yc @ yc))
    r = float(xc @ yc) / denom
    return max(-1.0, min(1.0, r))


def point_biserial(labels, values) -> float:
    """Pearson correlation of 0/1 labels with values; positive means class 1 has the larger mean."""
    y = np.asarray(labels, dtype=float).ravel()
    x = np.asarray(values, dtype=float).ravel()
    if y.size != x.size:
        raise LengthMismatch(f"{y.size} labels vs {x.size} values")
    if not np.isin(y, (0.0, 1.0)).all():
        raise ValueError("labels must be 0 or 1")
    if np.unique(y).size < 2:
        raise SingleClass("point-biserial needs both classes")
    if np.ptp(x) == 0:
        raise DegenerateData("values are all equal")
    return _pearson(y, x)


def spearman(x, y) -> float:
    """Spearman rho: Pearson correlation of average-tie ranks."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size != y.size:
        raise LengthMismatch(f"{x.size} vs {y.size}")
    if x.size < 3:
        raise InsufficientSamples("spearman needs at least 3 pairs")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise ConstantSequence("spearman is undefined for a constant sequence")
    return _pearson(rankdata(x), rankdata(y))


def correlate_columns(target, matrix, names, method: str = "spearman", skip_degenerate: bool = False):
    """Correlate ``target`` with every column of ``matrix``; returns ``[(name, coef)]``.

    ``method`` is ``"spearman"`` or ``"point_biserial"`` (``target`` holds labels).
    Columns where the coefficient is undefined are dropped when
    ``skip_degenerate`` is set, otherwise the error propagates.
    """
    fn = {"spearman": lambda t, c: spearman(c, t), "point_biserial": point_biserial}[method]
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != len(target) or m.shape[1] != len(names):
        raise LengthMismatch(f"matrix {m.shape} does not align with {len(target)} rows / {len(names)} names")
    out = []
    for j, name in enumerate(names):
        try:
            out.append((name, fn(target, m[:, j])))
        except (ConstantSequence, DegenerateData):
            if not skip_degenerate:
                raise
    return out


def rank_by_magnitude(pairs, k: int | None = None):
    # rounding makes float noise at the 1e-12 level count as a tie
    ranked = sorted(pairs, key=lambda p: (-round(abs(p[1]), 12), p[0]))
    return ranked if k is None else ranked[:k]


def top_k_correlates(labels_or_scores, matrix, names, k: int = 5, method: str = "spearman",
                     skip_degenerate: bool = False):
    """Top ``k`` columns by absolute correlation; ties go to the lexicographically smaller name."""
    pairs = correlate_columns(labels_or_scores, matrix, names, method, skip_degenerate)
    return rank_by_magnitude(pairs, k)
