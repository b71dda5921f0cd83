"""
Nyström evaluation of Fredholm determinants det(I - K χ) on one or several
time slices.

Every public result is computed at quad_order and 2*quad_order; the finer
value is returned and the difference is kept as the error certificate.
"""
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from src.exceptions import AccuracyException, DomainException
from src.kernels import ExtendedKernel, SourceSpec
from src.special import gauss_legendre, std_normal_cdf

logger = logging.getLogger(__name__)

DEFAULT_QUAD_ORDER = 48
DEFAULT_CUTOFF = 14.0
LIMITING_TOLERANCE = 1e-8
FINITE_TOLERANCE = 1e-6


@dataclass(frozen=True)
class DeterminantProblem:
    kernel: ExtendedKernel
    times: Tuple[float, ...]
    thresholds: Tuple[float, ...]
    quad_order: int = DEFAULT_QUAD_ORDER
    cutoff: float = DEFAULT_CUTOFF

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        thresholds = tuple(float(s) for s in self.thresholds)
        if len(times) < 1 or len(times) != len(thresholds):
            raise DomainException(
                f"times 与 thresholds 长度必须一致且非空：{len(times)} vs {len(thresholds)}"
            )
        if not np.all(np.isfinite(thresholds)):
            raise DomainException(f"thresholds 必须是有限实数：{thresholds}")
        if int(self.quad_order) != self.quad_order or self.quad_order < 8:
            raise DomainException(f"quad_order 必须 >= 8：{self.quad_order}")
        if not self.cutoff > 0:
            raise DomainException(f"cutoff 必须为正：{self.cutoff}")
        self.kernel.validate_times(times)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "thresholds", thresholds)
        object.__setattr__(self, "quad_order", int(self.quad_order))

    @property
    def tolerance(self):
        return LIMITING_TOLERANCE if self.kernel.limiting else FINITE_TOLERANCE


@dataclass(frozen=True)
class FredholmResult:
    value: float
    error: float
    quad_order: int


def _windows(problem: DeterminantProblem, order):
    rules = []
    for s in problem.thresholds:
        upper = max(s + problem.cutoff, problem.kernel.window_floor)
        rules.append(gauss_legendre(order, s, upper))
    return rules


def nystrom_determinant(problem: DeterminantProblem, order):
    """det(I - M) with M the symmetrically weighted block Nyström matrix."""
    rules = _windows(problem, order)
    m = len(rules)
    size = m * order
    mat = np.empty((size, size))
    roots = [np.sqrt(r.weights) for r in rules]
    for j in range(m):
        for k in range(m):
            block = problem.kernel.block(
                problem.times[j], rules[j].nodes, problem.times[k], rules[k].nodes
            )
            mat[j * order:(j + 1) * order, k * order:(k + 1) * order] = (
                roots[j][:, None] * block * roots[k][None, :]
            )
    sign, logdet = np.linalg.slogdet(np.eye(size) - mat)
    if sign == 0:
        return 0.0
    return float(sign * np.exp(logdet))


def evaluate(problem: DeterminantProblem) -> FredholmResult:
    coarse = nystrom_determinant(problem, problem.quad_order)
    fine = nystrom_determinant(problem, 2 * problem.quad_order)
    error = abs(fine - coarse)
    if not np.isfinite(fine) or error > problem.tolerance:
        logger.error(
            f"Fredholm 行列式收敛检验失败：kernel={problem.kernel.variant}, "
            f"thresholds={problem.thresholds}, n={problem.quad_order}, error={error}"
        )
        raise AccuracyException(
            "Fredholm 行列式收敛检验失败",
            kernel=problem.kernel.variant,
            thresholds=list(problem.thresholds),
            error=error,
        )
    return FredholmResult(
        value=float(np.clip(fine, 0.0, 1.0)),
        error=error,
        quad_order=problem.quad_order,
    )


def det_single(kernel, s, quad_order=DEFAULT_QUAD_ORDER, cutoff=DEFAULT_CUTOFF, tau=0.0):
    problem = DeterminantProblem(kernel, (tau,), (s,), quad_order, cutoff)
    return evaluate(problem).value


def det_multi(problem: DeterminantProblem):
    return evaluate(problem).value


def dist_f2(s, quad_order=DEFAULT_QUAD_ORDER):
    return det_single(ExtendedKernel.airy(), s, quad_order)


def dist_goe2(s, quad_order=DEFAULT_QUAD_ORDER):
    return det_single(ExtendedKernel.goe2(), s, quad_order)


def dist_f1(s, quad_order=DEFAULT_QUAD_ORDER):
    return float(np.sqrt(dist_goe2(s, quad_order)))


def dist_transition(s, omega, tau, quad_order=DEFAULT_QUAD_ORDER):
    return det_single(ExtendedKernel.transition(omega), s, quad_order, tau=tau)


def dist_finite_n(s, src: SourceSpec, quad_order=DEFAULT_QUAD_ORDER, edge=False):
    """P[λ₁ <= s] for H + V; s is in raw units unless edge is set."""
    return det_single(ExtendedKernel.finite_static(src, edge=edge), s, quad_order)


def dist_gaussian(s):
    return std_normal_cdf(s)


__all__ = [
    "DeterminantProblem",
    "FredholmResult",
    "det_multi",
    "det_single",
    "dist_f1",
    "dist_f2",
    "dist_finite_n",
    "dist_gaussian",
    "dist_goe2",
    "dist_transition",
    "evaluate",
    "nystrom_determinant",
]
