"""Hölder test functions and empirical convergence rates of the cubature rules.

The error of a rule at grid size n is the largest deviation, over a fixed
sample of singularity locations, from the same rule family evaluated at a
much finer resolution.  The order is the negative slope of a least-squares
line through (log n, log error).
"""

from dataclasses import dataclass, field
import logging
import math

import numpy as np

from .errors import ArgumentError
from .kernels import check_lambda
from .periodic import PeriodicGrid, build_weights_exact, eval_Kf, gamma_constant
from .planar import PlanarGrid, build_planar_weights, eval_Tf

logger = logging.getLogger(__name__)

FAMILIES = ("periodic", "planar", "radial", "lacunary")
LACUNARY_TERMS = 24
DEFAULT_GRID_SIZES = (8, 16, 32, 64)
DEFAULT_TARGETS = 20
ORACLE_FAR_ORDER = 4


@dataclass(frozen=True)
class HolderTestFunction:
    """f with |f(x) - f(y)| <= M (|x1 - y1|^alpha + |x2 - y2|^alpha)."""

    family: str
    alpha: float
    center: tuple
    M: float
    domain: tuple
    terms: int = 0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        a = self.alpha
        if self.family == "periodic":
            return np.abs(np.sin(x[..., 0])) ** a + np.abs(np.sin(x[..., 1])) ** a
        if self.family == "lacunary":
            k = np.arange(self.terms)
            coef = 2.0 ** (-a * k)
            freq = self._frequency_scale * 2.0 ** k
            return (np.cos(x[..., 0, None] * freq) @ coef) + (np.cos(x[..., 1, None] * freq) @ coef)
        dx, dy = x[..., 0] - self.center[0], x[..., 1] - self.center[1]
        if self.family == "planar":
            return np.abs(dx) ** a + np.abs(dy) ** a
        return (dx * dx + dy * dy) ** (0.5 * a)

    @property
    def _frequency_scale(self):
        # one full period of the lowest term across the domain
        return 2.0 * math.pi / (self.domain[1] - self.domain[0])


def _lacunary_constant(alpha, scale):
    # sum_k 2^(-alpha k) min(2^k scale d, 2) <= M_1 d^alpha, split at 2^k scale d = 2
    return (2.0 ** (1.0 - alpha) * scale ** alpha
            * (1.0 / (1.0 - 2.0 ** (alpha - 1.0)) + 1.0 / (1.0 - 2.0 ** (-alpha))))


def make_holder(family, alpha, params=None):
    """Test function of the given family and exponent.

    ``periodic``: |sin x1|^a + |sin x2|^a on [0, 2 pi]^2.
    ``planar``: |x1 - c1|^a + |x2 - c2|^a on [-1, 1]^2.
    ``radial``: |x - c|^a on [-1, 1]^2.
    ``lacunary``: sum over k < terms of 2^(-a k) (cos(2^k w x1) + cos(2^k w x2)),
    a Weierstrass-type function that is nowhere smoother than order a; it
    needs a < 1 and takes ``domain`` ("periodic" or "planar") and ``terms``.

    ``params`` may give ``center`` (default origin) for the cusp families.
    The cusp families satisfy the Hölder bound with M = 1.
    """
    if family not in FAMILIES:
        raise ArgumentError(f"unknown test-function family {family!r}; expected one of {FAMILIES}")
    if not 0 < alpha <= 1:
        raise ArgumentError(f"Hölder exponent must lie in (0, 1], got {alpha}")
    params = dict(params or {})
    center = tuple(float(c) for c in params.pop("center", (0.0, 0.0)))
    domain_kind = params.pop("domain", "periodic" if family in ("periodic", "lacunary") else "planar")
    terms = int(params.pop("terms", LACUNARY_TERMS))
    if params:
        raise ArgumentError(f"unexpected parameters {sorted(params)}")
    if domain_kind not in ("periodic", "planar"):
        raise ArgumentError(f"domain must be 'periodic' or 'planar', got {domain_kind!r}")
    domain = (0.0, 2.0 * math.pi) if domain_kind == "periodic" else (-1.0, 1.0)
    if family == "lacunary":
        if alpha >= 1:
            raise ArgumentError("lacunary functions need alpha < 1")
        if terms < 1:
            raise ArgumentError("terms must be positive")
        scale = 2.0 * math.pi / (domain[1] - domain[0])
        return HolderTestFunction(family, float(alpha), center,
                                  _lacunary_constant(alpha, scale), domain, terms)
    return HolderTestFunction(family, float(alpha), center, 1.0, domain)


def holder_ratio(f, rng, pairs=10_000):
    """Largest |f(x) - f(y)| / (M (|dx1|^a + |dx2|^a)) over random pairs in f's domain.

    Half the pairs are close (separation below 1e-3) to probe the cusps.
    """
    lo, hi = f.domain
    x = rng.uniform(lo, hi, size=(pairs, 2))
    y = rng.uniform(lo, hi, size=(pairs, 2))
    close = pairs // 2
    y[:close] = np.clip(x[:close] + rng.uniform(-1e-3, 1e-3, size=(close, 2)), lo, hi)
    d = np.abs(x - y) ** f.alpha
    bound = f.M * (d[:, 0] + d[:, 1])
    ok = bound > 0
    return float(np.max(np.abs(f(x) - f(y))[ok] / bound[ok]))


@dataclass
class RateReport:
    family: str
    grid_sizes: list
    errors: list
    order: float
    intercept: float
    residual: float
    oracle_resolution: int
    seed: int
    targets: np.ndarray
    monotone: bool = True
    fit_skipped: bool = False
    theoretical_constant: float = None
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {
            "family": self.family,
            "grid_sizes": list(self.grid_sizes),
            "sup_errors": [float(e) for e in self.errors],
            "fitted_order": self.order,
            "intercept": self.intercept,
            "fit_residual": self.residual,
            "oracle_resolution": self.oracle_resolution,
            "seed": self.seed,
            "monotone": self.monotone,
            "fit_skipped": self.fit_skipped,
            "theoretical_constant": self.theoretical_constant,
            "notes": list(self.notes),
        }


class RuleFamily:
    """Evaluates a cubature rule for a test function at (grid size, target)."""

    kind = None

    def __init__(self, lam=0.5, alpha=0.5):
        self.lam = check_lambda(lam)
        self.alpha = alpha

    def evaluate(self, f, n, target, far_order=None):
        raise NotImplementedError

    def sample_targets(self, rng, count, coarse_n):
        raise NotImplementedError


class PeriodicFamily(RuleFamily):
    """Midpoint rule for Kf with the kernel centred at the true target point."""

    kind = "periodic"

    def evaluate(self, f, n, target, far_order=None):
        grid = PeriodicGrid(n)
        kw = {} if far_order is None else {"far_order": far_order}
        rule = build_weights_exact(grid, self.lam, grid.cell_of(target), alpha=self.alpha,
                                   target=np.mod(target, 2 * math.pi), **kw)
        return eval_Kf(f, rule)

    def sample_targets(self, rng, count, coarse_n):
        mid = PeriodicGrid(coarse_n).midpoints
        return _mixed_targets(rng, count, mid, 0.0, 2 * math.pi)

    def theoretical_constant(self):
        """2 gamma / (1 + alpha) * pi^alpha, the leading error constant."""
        return 2.0 * gamma_constant(self.lam) / (1.0 + self.alpha) * math.pi ** self.alpha


class PlanarFamily(RuleFamily):
    kind = "planar"

    def evaluate(self, f, n, target, far_order=None):
        kw = {} if far_order is None else {"far_order": far_order}
        rule = build_planar_weights(PlanarGrid(n), self.lam, target, alpha=self.alpha, **kw)
        return eval_Tf(f, rule)

    def sample_targets(self, rng, count, coarse_n):
        mid = PlanarGrid(coarse_n).midpoints
        return _mixed_targets(rng, count, mid, -1.0, 1.0)

    def theoretical_constant(self):
        return None


def rule_family(kind, lam=0.5, alpha=0.5):
    if kind == "periodic":
        return PeriodicFamily(lam, alpha)
    if kind == "planar":
        return PlanarFamily(lam, alpha)
    raise ArgumentError(f"unknown rule family {kind!r}")


def _mixed_targets(rng, count, midpoints, lo, hi):
    n_mid = count // 2
    idx = rng.integers(0, len(midpoints), size=(n_mid, 2))
    mids = midpoints[idx]
    rand = rng.uniform(lo, hi, size=(count - n_mid, 2))
    return np.concatenate([mids, rand])


def fit_order(grid_sizes, errors):
    """Least-squares slope of log(error) against log(n): (order, intercept, rms residual)."""
    x = np.log(np.asarray(grid_sizes, dtype=float))
    y = np.log(np.asarray(errors, dtype=float))
    A = np.stack([x, np.ones_like(x)], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    return float(-coef[0]), float(coef[1]), float(np.sqrt(np.mean(resid ** 2)))


def measure_rate(family, f, seed, grid_sizes=DEFAULT_GRID_SIZES, oracle_resolution=512,
                 targets=None, n_targets=DEFAULT_TARGETS, floor=1e-12):
    """Sup-over-targets error of the rule family against its own fine-grid value.

    ``family`` is a :class:`RuleFamily` (or its kind name), ``seed`` fixes the
    target sample.  Non-monotone error sequences are flagged in the report.
    Errors below ``floor`` relative to the oracle values skip the fit.
    """
    if isinstance(family, str):
        family = rule_family(family)
    grid_sizes = sorted(int(n) for n in grid_sizes)
    if oracle_resolution < 8 * grid_sizes[-1]:
        raise ArgumentError("oracle resolution must be at least 8x the largest grid size")
    rng = np.random.default_rng(seed)
    if targets is None:
        targets = family.sample_targets(rng, n_targets, grid_sizes[0])
    targets = np.asarray(targets, dtype=float)
    oracle = np.array([family.evaluate(f, oracle_resolution, t, far_order=ORACLE_FAR_ORDER)
                       for t in targets])
    errors = []
    for n in grid_sizes:
        vals = np.array([family.evaluate(f, n, t) for t in targets])
        errors.append(float(np.max(np.abs(vals - oracle))))
    scale = float(np.max(np.abs(oracle))) or 1.0
    report = RateReport(family.kind, grid_sizes, errors, float("nan"), float("nan"),
                        float("nan"), oracle_resolution, seed, targets)
    report.monotone = all(b <= a for a, b in zip(errors, errors[1:]))
    if not report.monotone:
        report.notes.append("error sequence is not monotone")
        logger.warning("non-monotone error sequence for %s family: %s", family.kind, errors)
    if max(errors) <= floor * scale:
        report.fit_skipped = True
        report.notes.append("errors at quadrature floor; fit skipped")
    else:
        report.order, report.intercept, report.residual = fit_order(grid_sizes, errors)
    report.theoretical_constant = family.theoretical_constant()
    return report
