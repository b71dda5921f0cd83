"""
Value types shared by the kernels, samplers and the Fredholm engine.
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from src.exceptions import DomainException


@dataclass(frozen=True)
class SourceSpec:
    """Deterministic source V = diag(epsilons) for an N x N ensemble."""
    n: int
    epsilons: Tuple[float, ...]

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainException(f"矩阵维数 N 必须是正整数：{self.n}")
        eps = tuple(float(e) for e in self.epsilons)
        if len(eps) != self.n:
            raise DomainException(
                f"epsilons 长度 {len(eps)} 与 N={self.n} 不一致"
            )
        if not all(np.isfinite(eps)):
            raise DomainException("epsilons 必须是有限实数")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "epsilons", eps)

    @classmethod
    def from_list(cls, epsilons):
        return cls(n=len(epsilons), epsilons=tuple(epsilons))

    @classmethod
    def zero(cls, n):
        return cls(n=n, epsilons=(0.0,) * int(n))

    @classmethod
    def from_lambda(cls, n, lam):
        """Rank-1 source for H + V with the edge-critical value at lam = 1."""
        return cls(n=n, epsilons=(lam * np.sqrt(n / 2.0),) + (0.0,) * (int(n) - 1))

    @classmethod
    def from_omega(cls, n, omega):
        """Rank-1 source for the chain started at V/2, critical at omega = 0."""
        eps1 = np.sqrt(2.0 * n) * (1.0 - omega * n ** (-1.0 / 3.0))
        return cls(n=n, epsilons=(eps1,) + (0.0,) * (int(n) - 1))

    @property
    def array(self):
        return np.asarray(self.epsilons, dtype=float)

    @property
    def max_abs(self):
        return float(np.max(np.abs(self.epsilons)))

    def halved(self):
        return SourceSpec(n=self.n, epsilons=tuple(e / 2.0 for e in self.epsilons))


@dataclass(frozen=True)
class SpaceTimePoint:
    tau: float
    xi: float

    def __post_init__(self):
        if not (np.isfinite(self.tau) and np.isfinite(self.xi)):
            raise DomainException(f"时空点必须是有限实数：({self.tau}, {self.xi})")


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing observation times starting at 0."""
    times: Tuple[float, ...]

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        if len(times) < 1:
            raise DomainException("时间网格不能为空")
        if times[0] != 0.0:
            raise DomainException(f"时间网格的第一个时间必须为 0：{times[0]}")
        if not all(np.isfinite(times)) or np.any(np.diff(times) <= 0):
            raise DomainException(f"时间网格必须严格递增：{times}")
        object.__setattr__(self, "times", times)

    def __len__(self):
        return len(self.times)

    def __iter__(self):
        return iter(self.times)

    def increments(self):
        return np.diff(self.times)
