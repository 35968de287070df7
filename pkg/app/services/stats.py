"""
Goodness-of-fit machinery. Every check returns a TestReport; suites use
level 1e-3 for p-value tests and |z| <= 4 for moment tests.
"""

import logging
import math
from typing import Callable, Optional

import numpy as np
from scipy import special
from scipy import stats as sps

from app.errors import DegenerateTestError, MalformedInputError
from app.schemas import TestReport

logger = logging.getLogger(__name__)

LEVEL = 1e-3
# one band for every moment check: |z| <= 4 fails a true null with
# probability 6e-5, so dozens of checks in one suite run stay below a 5%
# spurious-failure rate
Z_MAX = 4.0
MERGE_MIN = 5.0


def _report(**fields) -> TestReport:
    report = TestReport(**fields)
    logger.debug(
        "%s: statistic=%.6g p=%s n=%d passed=%s", report.name, report.statistic, report.p_value, report.n, report.passed
    )
    return report


def ks_test(samples, cdf: Callable, name: str = "ks", level: float = LEVEL) -> TestReport:
    """Two-sided one-sample KS with the asymptotic Kolmogorov p-value."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n < 20:
        raise DegenerateTestError(f"{name}: KS needs at least 20 samples, got {n}")
    F = np.asarray(cdf(x), dtype=float)
    if np.any(np.diff(F) < -1e-12) or np.any((F < -1e-12) | (F > 1 + 1e-12)):
        raise MalformedInputError(f"{name}: cdf is not a non-decreasing map into [0, 1] on the samples")
    i = np.arange(1, n + 1)
    d = float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))
    p = float(special.kolmogorov(math.sqrt(n) * d))
    return _report(name=name, kind="ks", statistic=d, p_value=p, n=n, passed=p >= level, level=level)


def ks_two_sample(a, b, name: str = "ks2", level: float = LEVEL) -> TestReport:
    result = sps.ks_2samp(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    n = len(a) + len(b)
    p = float(result.pvalue)
    return _report(name=name, kind="ks2", statistic=float(result.statistic), p_value=p, n=n, passed=p >= level, level=level)


def bin_counts(samples, top: int) -> np.ndarray:
    """Counts of 0, 1, ..., top-1 and a last bin for values >= top."""
    values = np.minimum(np.asarray(samples, dtype=np.int64), top)
    return np.bincount(values, minlength=top + 1)


def _merge_groups(expected: np.ndarray, merge_min: float) -> list[list[int]]:
    """Adjacent bins grouped left to right until each group's expectation reaches merge_min."""
    groups: list[list[int]] = []
    current: list[int] = []
    acc = 0.0
    for i, e in enumerate(expected):
        current.append(i)
        acc += e
        if acc >= merge_min:
            groups.append(current)
            current, acc = [], 0.0
    if current:
        if groups:
            groups[-1].extend(current)
        else:
            groups.append(current)
    return groups


def chi_square_pmf_test(
    counts, pmf, merge_min: float = MERGE_MIN, name: str = "chi2", level: float = LEVEL
) -> TestReport:
    """
    Pearson goodness of fit of binned counts against bin probabilities. The
    last bin is expected to carry the tail mass.
    """
    counts = np.asarray(counts, dtype=float)
    pmf = np.asarray(pmf, dtype=float)
    if counts.shape != pmf.shape:
        raise MalformedInputError(f"{name}: {counts.size} count bins for {pmf.size} probabilities")
    n = int(counts.sum())
    expected = n * pmf
    groups = _merge_groups(expected, merge_min)
    if len(groups) < 2:
        raise DegenerateTestError(f"{name}: fewer than 2 bins after merging to expected count {merge_min}")
    observed = np.array([counts[g].sum() for g in groups])
    exp = np.array([expected[g].sum() for g in groups])
    statistic = float(np.sum((observed - exp) ** 2 / exp))
    p = float(sps.chi2.sf(statistic, len(groups) - 1))
    return _report(
        name=name,
        kind="chi2",
        statistic=statistic,
        p_value=p,
        n=n,
        passed=p >= level,
        level=level,
        metadata={"bins": len(groups)},
    )


def two_sample_chi_square(
    counts_a, counts_b, merge_min: float = MERGE_MIN, name: str = "chi2_two_sample", level: float = LEVEL
) -> TestReport:
    """Homogeneity of two binned integer samples (2 x k contingency table)."""
    a = np.asarray(counts_a, dtype=float)
    b = np.asarray(counts_b, dtype=float)
    pooled = a + b
    share = min(a.sum(), b.sum()) / pooled.sum()
    groups = _merge_groups(pooled * share, merge_min)
    if len(groups) < 2:
        raise DegenerateTestError(f"{name}: fewer than 2 bins after merging")
    table = np.array([[a[g].sum() for g in groups], [b[g].sum() for g in groups]])
    statistic, p, dof, _ = sps.chi2_contingency(table, correction=False)
    return _report(
        name=name,
        kind="chi2",
        statistic=float(statistic),
        p_value=float(p),
        n=int(pooled.sum()),
        passed=float(p) >= level,
        level=level,
        metadata={"bins": len(groups), "dof": int(dof)},
    )


def moment_z(samples, target_mean: float, target_sd: Optional[float] = None, name: str = "moment", z_max: float = Z_MAX) -> TestReport:
    """z-score of the sample mean; the sample sd is used when target_sd is None."""
    x = np.asarray(samples, dtype=float)
    n = x.size
    if n < 100:
        raise DegenerateTestError(f"{name}: moment test needs at least 100 samples, got {n}")
    mean = float(x.mean())
    sd = float(x.std(ddof=1)) if target_sd is None else target_sd
    if sd == 0:
        z = 0.0 if mean == target_mean else math.inf
    else:
        z = (mean - target_mean) / (sd / math.sqrt(n))
    p = float(2 * sps.norm.sf(abs(z)))
    level = float(2 * sps.norm.sf(z_max))
    return _report(
        name=name,
        kind="z",
        statistic=z,
        p_value=p,
        n=n,
        passed=p >= level,
        level=level,
        metadata={"mean": mean, "target": target_mean, "sd": sd},
    )


def poisson_dispersion(counts, mean: Optional[float] = None, name: str = "dispersion", level: float = LEVEL) -> TestReport:
    """
    Index of dispersion Σ(c - m)²/m, two-sided against chi-square. With the
    sample mean m there are n-1 degrees of freedom, with a known mean n.
    """
    c = np.asarray(counts, dtype=float)
    n = c.size
    if n < 50:
        raise DegenerateTestError(f"{name}: dispersion test needs at least 50 counts, got {n}")
    m = float(c.mean()) if mean is None else mean
    if m <= 0:
        raise DegenerateTestError(f"{name}: Poisson mean is zero")
    dof = n - 1 if mean is None else n
    statistic = float(np.sum((c - m) ** 2) / m)
    p = float(min(1.0, 2 * min(sps.chi2.cdf(statistic, dof), sps.chi2.sf(statistic, dof))))
    return _report(
        name=name,
        kind="dispersion",
        statistic=statistic,
        p_value=p,
        n=n,
        passed=p >= level,
        level=level,
        metadata={"mean": m, "dof": dof},
    )


def tolerance_check(name: str, value: float, target: float, tol: float, n: int = 0, relative: bool = False) -> TestReport:
    gap = abs(value - target)
    if relative:
        gap /= abs(target)
    return _report(
        name=name,
        kind="tolerance",
        statistic=gap,
        n=n,
        passed=gap <= tol,
        level=tol,
        metadata={"value": value, "target": target},
    )


def log_sup_diagnostic(sup_scaled) -> dict[str, float]:
    """Empirical E[(log+ sup e^{-ηt}X(t))^2]; reported, never tested."""
    x = np.asarray([s for s in sup_scaled if s is not None], dtype=float)
    log_plus = np.log(np.maximum(x, 1.0))
    return {
        "n": int(x.size),
        "mean_log_plus_sq": float(np.mean(log_plus**2)) if x.size else math.nan,
        "max": float(x.max()) if x.size else math.nan,
    }
