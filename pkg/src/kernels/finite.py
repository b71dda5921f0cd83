"""
Finite-N kernels: the Ornstein-Uhlenbeck propagator, the Gaussian-regime
limit and the static / dynamical double-contour kernels of the source
ensembles.
"""
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from src.exceptions import ConfigException, DomainException, NumericException
from src.kernels.hermite import SourceBasis
from src.kernels.source import SourceSpec
from src.special import circle_rule, real_input, vertical_line_rule

# 截断处被积函数的量级 e^{-41.5} ≈ 1e-18
TRUNCATION_LOG = 41.5
# 围道求和的舍入误差与加倍节点后的差异都须低于此值（相对 max(1, |K|)）
CONTOUR_TOLERANCE = 1e-7
KERNEL_METHODS = ("hermite", "contour")


@dataclass(frozen=True)
class ContourParams:
    """
    Geometry of the contour quadrature.

    h is the gap between the pole line and the nearest pole; the circle
    defaults to center (lo+hi)/2 + h/4 and radius (hi-lo)/2 + 3h/4 where
    [lo, hi] spans the poles and 0.
    """
    h: float = 0.25
    circle_points: int = 256
    line_order: int = 24
    center: Optional[float] = None
    radius: Optional[float] = None

    def refined(self):
        return ContourParams(
            h=self.h,
            circle_points=2 * self.circle_points,
            line_order=2 * self.line_order,
            center=self.center,
            radius=self.radius,
        )

    def circle(self, poles):
        lo = min(float(np.min(poles)), 0.0)
        hi = max(float(np.max(poles)), 0.0)
        center = (lo + hi) / 2.0 + self.h / 4.0 if self.center is None else self.center
        radius = (hi - lo) / 2.0 + 0.75 * self.h if self.radius is None else self.radius
        pole_line = lo - self.h
        if radius <= 0 or center - radius <= pole_line:
            raise ConfigException(
                f"积分围道与极点线相交：center={center}, radius={radius}, pole_line={pole_line}"
            )
        if np.any(np.abs(np.append(poles, 0.0) - center) >= radius):
            raise ConfigException(
                f"积分围道没有包住全部极点：center={center}, radius={radius}"
            )
        return circle_rule(self.circle_points, center, radius), pole_line


DEFAULT_CONTOUR = ContourParams()


def _truncation(log_growth, quadratic, start=20.0):
    # 不动点迭代求 T
    T = start
    for _ in range(8):
        T = np.sqrt(quadratic * (TRUNCATION_LOG + log_growth(T)))
    return float(T)


def phi_ou(t_i, x, t_j, y):
    """
    Transition density of the matrix OU chain between times t_i <= t_j.
    """
    real_input([t_i, x, t_j, y], "phi_ou 参数")
    d = float(t_i) - float(t_j)
    if d > 0:
        return 0.0
    if d == 0:
        raise DomainException("phi_ou 在相同时间处退化为 δ 函数", t=t_i)
    one_minus = -np.expm1(2.0 * d)
    rho = np.exp(d)
    log_value = 0.5 * (d - np.log(np.pi * one_minus)) - (y - rho * x) ** 2 / one_minus
    return float(np.exp(log_value))


def phi_ou_block(t_i, xs, t_j, ys):
    d = float(t_i) - float(t_j)
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    if d > 0:
        return np.zeros((xs.size, ys.size))
    if d == 0:
        raise DomainException("phi_ou 在相同时间处退化为 δ 函数", t=t_i)
    one_minus = -np.expm1(2.0 * d)
    rho = np.exp(d)
    diff = ys[None, :] - rho * xs[:, None]
    return np.exp(0.5 * (d - np.log(np.pi * one_minus)) - diff ** 2 / one_minus)


def gaussian_regime_width(lam):
    if not lam > 1:
        raise DomainException(f"高斯区域要求 Λ > 1，当前 Λ={lam}", lam=lam)
    return float(np.sqrt((lam ** 2 - 1.0) / (2.0 * lam ** 2)))


def k_gauss_limit(X, lam):
    b_g = gaussian_regime_width(lam)
    arr, scalar = real_input(X, "X")
    out = np.exp(-0.5 * arr ** 2) / (np.sqrt(2.0 * np.pi) * b_g)
    return float(out) if scalar else out


def _certified(value, bound):
    if not np.all(np.isfinite(value)) or not np.all(np.isfinite(bound)):
        raise NumericException("围道积分溢出，得到非有限值")
    scale = np.maximum(1.0, np.abs(value))
    worst = float(np.max(np.finfo(float).eps * bound / scale))
    if worst > CONTOUR_TOLERANCE:
        raise NumericException(
            "围道积分相消过于严重，结果不可信，请改用 hermite 方式", rounding=worst
        )
    return value


def static_contour_block(xs, ys, src: SourceSpec, params: ContourParams = DEFAULT_CONTOUR):
    """
    K_N(x, y) of H + V by the v-circle / u-line double integral.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    eps = src.array
    circle, pole_line = params.circle(eps)
    # v = -iu/2 落在 Re v = pole_line 上
    shift = -pole_line
    e_max = src.max_abs
    T = _truncation(
        lambda T: src.n * np.log(T / 2.0 + e_max + shift + 1.0) + shift ** 2, 4.0
    )
    x_max = float(np.max(np.abs(xs)))
    panels = max(4, int(np.ceil(2.0 * T * (x_max + 2.0) / 8.0)))
    line = vertical_line_rule(params.line_order, 0.0, T, panels)
    t = line.nodes.imag
    wt = line.weights.imag
    u = t - 2j * shift

    num = np.prod(-eps[None, :] - 0.5j * u[:, None], axis=1)
    ex = (wt * num)[None, :] * np.exp(-0.25 * u[None, :] ** 2 + 1j * u[None, :] * xs[:, None])

    v = circle.nodes
    den = np.prod(v[:, None] - eps[None, :], axis=1)
    ey = (circle.weights / (2j * np.pi) / den)[None, :] * np.exp(
        -v[None, :] ** 2 + 2.0 * v[None, :] * ys[:, None]
    )
    cross = 1.0 / (v[:, None] + 0.5j * u[None, :])
    value = (-(ex @ (ey @ cross).T) / (2.0 * np.pi)).real
    bound = (np.abs(ex) @ (np.abs(ey) @ np.abs(cross)).T) / (2.0 * np.pi)
    return _certified(value, bound)


def dynamical_contour_block(
    t_r, xs, t_s, ys, src: SourceSpec, params: ContourParams = DEFAULT_CONTOUR
):
    """
    Dyson-chain kernel by the z-circle / w-line double integral, in the
    gauge where the propagator enters as e^{y²-x²} phi.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    t_r, t_s = float(t_r), float(t_s)
    prime = src.array / np.sqrt(2.0)
    circle, pole_line = params.circle(np.exp(-t_s) * prime)
    w0 = pole_line * np.exp(t_s - t_r)
    p_max = float(np.max(np.abs(prime)))
    T = _truncation(
        lambda T: 0.5 * w0 ** 2
        + src.n * np.log(np.exp(t_r) * (T + abs(w0)) + p_max + 1.0),
        2.0,
    )
    x_max = float(np.max(np.abs(xs)))
    panels = max(4, int(np.ceil(2.0 * T * (np.sqrt(2.0) * x_max + abs(w0) + 2.0) / 8.0)))
    line = vertical_line_rule(params.line_order, w0, T, panels)
    w = line.nodes
    wt = line.weights.imag / (2.0 * np.pi)

    num = np.prod(np.exp(t_r) * w[:, None] - prime[None, :], axis=1)
    ew = (wt * num)[None, :] * np.exp(
        0.5 * w[None, :] ** 2 - np.sqrt(2.0) * w[None, :] * xs[:, None]
    )
    z = circle.nodes
    den = np.prod(np.exp(t_s) * z[:, None] - prime[None, :], axis=1)
    ez = (circle.weights / (2j * np.pi) / den)[None, :] * np.exp(
        -0.5 * z[None, :] ** 2 + np.sqrt(2.0) * z[None, :] * ys[:, None]
    )
    cross = 1.0 / (w[None, :] * np.exp(t_r - t_s) - z[:, None])
    prefactor = np.sqrt(2.0) * np.exp(0.5 * (t_r - t_s))
    value = (prefactor * (ew @ (ez @ cross).T)).real
    bound = prefactor * (np.abs(ew) @ (np.abs(ez) @ np.abs(cross)).T)
    if t_r < t_s:
        propagator = np.exp(ys[None, :] ** 2 - xs[:, None] ** 2) * phi_ou_block(t_r, xs, t_s, ys)
        value = value - propagator
        bound = bound + propagator
    return _certified(value, bound)


@lru_cache(maxsize=16)
def _static_basis(src: SourceSpec):
    return SourceBasis.static(src)


@lru_cache(maxsize=16)
def _dynamical_basis(src: SourceSpec):
    return SourceBasis.dynamical(src)


def _check_method(method):
    if method not in KERNEL_METHODS:
        raise ConfigException(f"未知的 kernel 计算方式：{method}")


def _refinement_certified(evaluate, params: ContourParams):
    coarse = evaluate(params)
    fine = evaluate(params.refined())
    if abs(fine - coarse) > CONTOUR_TOLERANCE * max(1.0, abs(fine)):
        raise NumericException(
            "围道积分在节点加倍后不收敛", coarse=coarse, fine=fine
        )
    return fine


def k_finite_static(
    x, y, src: SourceSpec, params: ContourParams = DEFAULT_CONTOUR, method="hermite"
):
    """
    K_N(x, y) of H + V in the contour gauge.

    The default evaluates the multiple-Hermite basis, which stays accurate
    at large N; method="contour" runs the double contour at `params` and at
    `params.refined()` and raises NumericException unless both agree.
    """
    real_input([x, y], "x, y")
    _check_method(method)
    if method == "hermite":
        return float(_static_basis(src).contour_gauge(0.0, [x], 0.0, [y])[0, 0])
    return _refinement_certified(
        lambda p: float(static_contour_block([x], [y], src, p)[0, 0]), params
    )


def k_finite_dyn(
    t_r, x, t_s, y, src: SourceSpec, params: ContourParams = DEFAULT_CONTOUR, method="hermite"
):
    real_input([t_r, x, t_s, y], "t, x")
    _check_method(method)
    if method == "hermite":
        return float(_dynamical_basis(src).contour_gauge(t_r, [x], t_s, [y])[0, 0])
    return _refinement_certified(
        lambda p: float(dynamical_contour_block(t_r, [x], t_s, [y], src, p)[0, 0]), params
    )
