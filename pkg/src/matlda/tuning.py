"""Tuning-parameter selection by validation error or k-fold cross-validation."""

from dataclasses import dataclass, field, replace
import logging
import warnings

import numpy as np

from .bcd import PenaltyConfig, fit
from .classifier import predict_batch
from .linalg import LinAlgFailure
from .metrics import misclassification_rate

log = logging.getLogger(__name__)


def pow2_grid(lo=-12.0, step=0.5, hi=12.0):
    """``{2**x : x = lo, lo + step, ..., hi}``."""
    n = int(round((hi - lo) / step)) + 1
    return [float(2.0 ** (lo + k * step)) for k in range(n)]


def parse_grid(spec):
    """Parse ``"pow2:LO:STEP:HI"`` or a comma-separated list of values."""
    spec = spec.strip()
    if spec.startswith("pow2:"):
        parts = spec.split(":")[1:]
        if len(parts) != 3:
            raise ValueError(f"bad grid spec {spec!r}; expected pow2:LO:STEP:HI")
        lo, step, hi = map(float, parts)
        if step <= 0 or hi < lo:
            raise ValueError(f"bad grid spec {spec!r}")
        return pow2_grid(lo, step, hi)
    return [float(v) for v in spec.split(",") if v.strip()]


def _clean(values):
    vals = sorted(set(float(v) for v in values))
    if not vals or vals[0] < 0:
        raise ValueError("grid values must be nonnegative and nonempty")
    return vals


@dataclass
class TuningGrid:
    lambda1_values: list
    lambda2_values: list

    def __post_init__(self):
        self.lambda1_values = _clean(self.lambda1_values)
        self.lambda2_values = _clean(self.lambda2_values)

    @classmethod
    def default(cls):
        g = pow2_grid()
        return cls(g, g)

    def cells(self):
        return [(a, b) for a in self.lambda1_values for b in self.lambda2_values]


@dataclass
class TuningReport:
    """Per-cell errors (``None`` for failed fits) and the selected pair.

    Among cells with the minimum error the largest ``lambda1`` wins, then the
    largest ``lambda2``.
    """

    errors: dict
    chosen: tuple
    min_error: float
    ties: int
    fit: object = None
    failed: list = field(default_factory=list)


def _select(errors):
    ok = {k: v for k, v in errors.items() if v is not None}
    if not ok:
        raise RuntimeError("every grid cell failed to fit")
    best = min(ok.values())
    tied = [k for k, v in ok.items() if v == best]
    return max(tied), best, len(tied)


def _sweep_row(train, lambda1, lambda2_desc, cfg, warm_start, evaluate):
    """Fit one lambda1 row in descending lambda2 order; call ``evaluate`` per cell."""
    prev = None
    for lam2 in lambda2_desc:
        c = replace(cfg, lambda1=lambda1, lambda2=lam2)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                res = fit(train, c, init=prev if warm_start else None)
        except (LinAlgFailure, ValueError, FloatingPointError) as exc:
            log.warning("fit failed at lambda1=%g lambda2=%g: %s", lambda1, lam2, exc)
            evaluate((lambda1, lam2), None)
            continue
        prev = res
        evaluate((lambda1, lam2), res)


def grid_search(train, validate, grid, cfg=None, warm_start=True):
    """Fit on ``train`` for every grid cell and pick the lowest validation error.

    Within each ``lambda1`` row the fits run from the largest ``lambda2`` down,
    each warm-started from the previous one.
    """
    cfg = PenaltyConfig() if cfg is None else cfg
    errors, fits = {}, {}

    def evaluate(cell, res):
        if res is None:
            errors[cell] = None
            return
        errors[cell] = misclassification_rate(predict_batch(validate.X, res.params), validate.y)
        fits[cell] = res

    for lam1 in grid.lambda1_values:
        _sweep_row(train, lam1, grid.lambda2_values[::-1], cfg, warm_start, evaluate)
        # keep memory bounded: only the current best cells are needed afterwards
        if any(v is not None for v in errors.values()):
            keep, _, _ = _select(errors)
            fits = {keep: fits[keep]}
    chosen, best, ties = _select(errors)
    failed = sorted(k for k, v in errors.items() if v is None)
    return TuningReport(errors, chosen, best, ties, fits[chosen], failed)


def stratified_folds(labels, k, seed=0):
    """Fold index per observation; class-stratified when every class has >= k members.

    Fold sizes differ by at most one.
    """
    labels = np.asarray(labels)
    n = labels.size
    if k < 2 or n < k:
        raise ValueError(f"need 2 <= k <= n, got k={k}, n={n}")
    rng = np.random.default_rng(seed)
    classes, counts = np.unique(labels, return_counts=True)
    if counts.min() < k:
        warnings.warn("a class has fewer members than folds; using unstratified folds",
                      RuntimeWarning, stacklevel=2)
        order = rng.permutation(n)
    else:
        order = np.concatenate([rng.permutation(np.flatnonzero(labels == c)) for c in classes])
    folds = np.empty(n, dtype=np.int64)
    folds[order] = np.arange(n) % k
    return folds


def kfold_cv(data, k, grid, cfg=None, seed=0, warm_start=True):
    """Select tuning parameters by mean k-fold misclassification error.

    The returned report has no ``fit``; refit on the full data at ``chosen``.
    """
    cfg = PenaltyConfig() if cfg is None else cfg
    folds = stratified_folds(data.y, k, seed)
    per_cell = {cell: [] for cell in grid.cells()}
    for f in range(k):
        train = data.subset(np.flatnonzero(folds != f))
        held = data.subset(np.flatnonzero(folds == f))

        def evaluate(cell, res):
            if res is None:
                per_cell[cell].append(None)
            else:
                per_cell[cell].append(
                    misclassification_rate(predict_batch(held.X, res.params), held.y))

        for lam1 in grid.lambda1_values:
            _sweep_row(train, lam1, grid.lambda2_values[::-1], cfg, warm_start, evaluate)
    errors = {cell: (None if any(e is None for e in errs) else float(np.mean(errs)))
              for cell, errs in per_cell.items()}
    chosen, best, ties = _select(errors)
    failed = sorted(k_ for k_, v in errors.items() if v is None)
    return TuningReport(errors, chosen, best, ties, None, failed)
