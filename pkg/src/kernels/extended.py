import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Tuple

import numpy as np

from src.exceptions import ConfigException, DomainException
from src.kernels.airy import (
    k12_block,
    k2_ext_block,
    k_transition_block,
    check_transition,
)
from src.kernels.finite import (
    DEFAULT_CONTOUR,
    KERNEL_METHODS,
    ContourParams,
    dynamical_contour_block,
    gaussian_regime_width,
    k_gauss_limit,
    static_contour_block,
)
from src.kernels.hermite import SourceBasis
from src.kernels.source import SourceSpec, SpaceTimePoint, TimeGrid

logger = logging.getLogger(__name__)

AIRY = "Airy"
GOE2 = "Goe2"
TRANSITION = "Transition"
FINITE_STATIC = "FiniteStatic"
FINITE_DYNAMICAL = "FiniteDynamical"
GAUSS_LIMIT = "GaussLimit"

VARIANTS = (AIRY, GOE2, TRANSITION, FINITE_STATIC, FINITE_DYNAMICAL, GAUSS_LIMIT)
LIMITING = (AIRY, GOE2, TRANSITION, GAUSS_LIMIT)


@dataclass(frozen=True)
class ExtendedKernel:
    """
    A correlation kernel together with its numerical parameters.

    Limiting variants live in scaled coordinates. Finite-N variants live in
    raw eigenvalue coordinates unless `edge` is set, in which case
    x = sqrt(2N) + xi / (sqrt(2) N^{1/6}) and the Jacobian is folded in.
    """
    variant: str
    omega: float = 0.0
    source: Optional[SourceSpec] = None
    times: Tuple[float, ...] = (0.0,)
    lam: Optional[float] = None
    method: str = "hermite"
    edge: bool = False
    contour: ContourParams = field(default=DEFAULT_CONTOUR)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigException(f"未知的 kernel 类型：{self.variant}")
        if self.method not in KERNEL_METHODS:
            raise ConfigException(f"未知的 kernel 计算方式：{self.method}")
        if self.variant == FINITE_DYNAMICAL:
            TimeGrid(self.times)
        if self.variant in (FINITE_STATIC, FINITE_DYNAMICAL) and self.source is None:
            raise ConfigException("有限 N kernel 需要 SourceSpec")
        if self.variant == GAUSS_LIMIT:
            gaussian_regime_width(self.lam)

    @classmethod
    def airy(cls):
        return cls(variant=AIRY)

    @classmethod
    def goe2(cls):
        return cls(variant=GOE2)

    @classmethod
    def transition(cls, omega):
        return cls(variant=TRANSITION, omega=float(omega))

    @classmethod
    def finite_static(cls, src: SourceSpec, edge=False, method="hermite", contour=DEFAULT_CONTOUR):
        return cls(variant=FINITE_STATIC, source=src, edge=edge, method=method, contour=contour)

    @classmethod
    def finite_dynamical(
        cls, src: SourceSpec, times, edge=False, method="hermite", contour=DEFAULT_CONTOUR
    ):
        return cls(
            variant=FINITE_DYNAMICAL,
            source=src,
            times=tuple(float(t) for t in times),
            edge=edge,
            method=method,
            contour=contour,
        )

    @classmethod
    def gauss_limit(cls, lam):
        return cls(variant=GAUSS_LIMIT, lam=float(lam))

    @property
    def limiting(self):
        return self.variant in LIMITING

    @property
    def multi_time(self):
        return self.variant in (AIRY, TRANSITION, FINITE_DYNAMICAL)

    @cached_property
    def basis(self):
        if self.variant == FINITE_STATIC:
            return SourceBasis.static(self.source)
        return SourceBasis.dynamical(self.source)

    @property
    def window_floor(self):
        """Upper end below which the integration window never stops."""
        if self.variant == GAUSS_LIMIT:
            return 9.0
        if self.limiting or self.edge:
            return 8.0
        return max(np.sqrt(2.0 * self.source.n), self.source.max_abs) + 8.0

    def _raw(self, coords):
        coords = np.atleast_1d(np.asarray(coords, dtype=float))
        if not self.edge:
            return coords
        n = self.source.n
        return np.sqrt(2.0 * n) + coords / (np.sqrt(2.0) * n ** (1.0 / 6.0))

    def _jacobian(self):
        if not self.edge:
            return 1.0
        return 1.0 / (np.sqrt(2.0) * self.source.n ** (1.0 / 6.0))

    def _check_time(self, tau):
        if self.variant == FINITE_DYNAMICAL:
            if tau not in self.times:
                raise ConfigException(f"时间 {tau} 不在 kernel 的时间网格 {self.times} 上")
        elif not self.multi_time and tau != 0:
            raise ConfigException(f"{self.variant} 只能在单一时间上使用")

    def block(self, tau_r, xs, tau_s, ys):
        """Matrix K(tau_r, xs[i]; tau_s, ys[j])."""
        self._check_time(tau_r)
        self._check_time(tau_s)
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        ys = np.atleast_1d(np.asarray(ys, dtype=float))
        if self.variant == AIRY:
            return k2_ext_block(tau_r, xs, tau_s, ys)
        if self.variant == GOE2:
            return k12_block(xs, ys)
        if self.variant == TRANSITION:
            return k_transition_block(tau_r, xs, tau_s, ys, self.omega)
        if self.variant == GAUSS_LIMIT:
            # 乘上 B_G 的 Jacobian，使 det = Φ(s)
            b_g = gaussian_regime_width(self.lam)
            return np.outer(np.ones_like(xs), b_g * k_gauss_limit(ys, self.lam))
        rx, ry = self._raw(xs), self._raw(ys)
        if self.method == "hermite":
            values = self.basis.block(tau_r, rx, tau_s, ry)
        elif self.variant == FINITE_STATIC:
            values = static_contour_block(rx, ry, self.source, self.contour)
        else:
            values = dynamical_contour_block(tau_r, rx, tau_s, ry, self.source, self.contour)
        return values * self._jacobian()

    def __call__(self, p1: SpaceTimePoint, p2: SpaceTimePoint):
        return float(self.block(p1.tau, [p1.xi], p2.tau, [p2.xi])[0, 0])

    def validate_times(self, times):
        if self.variant == TRANSITION:
            for t in times:
                check_transition(self.omega, t)
        for t in times:
            self._check_time(t)
        if any(b <= a for a, b in zip(times, times[1:])):
            raise DomainException(f"时间必须严格递增：{times}")
