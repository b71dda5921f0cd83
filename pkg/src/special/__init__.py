"""
Special functions and quadrature rules shared by every analytic evaluator.

All functions accept scalars or numpy arrays and return the same shape;
scalar input gives a python float back.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special as sp

from src.exceptions import DomainException

AIRY_TAIL_WINDOW = 40.0
AIRY_PANEL_LENGTH = 2.5
AIRY_PANEL_ORDER = 24


def real_input(value, name, allow_infinite=False):
    arr = np.asarray(value, dtype=float)
    bad = np.isnan(arr) if allow_infinite else ~np.isfinite(arr)
    if np.any(bad):
        raise DomainException(f"{name} 必须是有限实数", value=str(value))
    return arr, arr.ndim == 0


def _result(arr, scalar):
    return float(arr) if scalar else arr


@dataclass(frozen=True)
class Quadrature:
    nodes: np.ndarray
    weights: np.ndarray
    domain: str
    bounds: tuple

    def __post_init__(self):
        if len(self.nodes) < 1 or len(self.nodes) != len(self.weights):
            raise DomainException("quadrature nodes/weights 长度不一致")
        self.nodes.flags.writeable = False
        self.weights.flags.writeable = False

    def __len__(self):
        return len(self.nodes)

    def integrate(self, f):
        return np.sum(f(self.nodes) * self.weights, axis=-1)


@lru_cache(maxsize=64)
def _legendre(n):
    t, w = np.polynomial.legendre.leggauss(n)
    return t, w


def gauss_legendre(n, a, b):
    """
    n-point Gauss-Legendre rule on [a, b], exact for degree <= 2n-1.
    """
    if int(n) != n or n < 1:
        raise DomainException(f"n 必须是正整数：{n}")
    if not (np.isfinite(a) and np.isfinite(b)) or a >= b:
        raise DomainException(f"积分区间不合法：[{a}, {b}]")
    t, w = _legendre(int(n))
    half = 0.5 * (b - a)
    return Quadrature(
        nodes=half * t + 0.5 * (a + b),
        weights=half * w,
        domain="interval",
        bounds=(float(a), float(b)),
    )


def composite_gauss_legendre(n, a, b, panels):
    if panels < 1:
        raise DomainException(f"panels 必须 >= 1：{panels}")
    edges = np.linspace(a, b, int(panels) + 1)
    rules = [gauss_legendre(n, lo, hi) for lo, hi in zip(edges[:-1], edges[1:])]
    return Quadrature(
        nodes=np.concatenate([r.nodes for r in rules]),
        weights=np.concatenate([r.weights for r in rules]),
        domain="interval",
        bounds=(float(a), float(b)),
    )


def circle_rule(n, center, radius):
    """Trapezoid rule for the positively oriented circle; weights discretise dz."""
    if n < 1 or radius <= 0:
        raise DomainException(f"圆周积分参数不合法：n={n}, radius={radius}")
    theta = 2.0 * np.pi * np.arange(n) / n
    unit = np.exp(1j * theta)
    return Quadrature(
        nodes=center + radius * unit,
        weights=1j * radius * unit * (2.0 * np.pi / n),
        domain="circle",
        bounds=(complex(center), float(radius)),
    )


def vertical_line_rule(n, x0, half_height, panels=1):
    """Upward segment x0 + i t, |t| <= half_height; weights discretise dz = i dt."""
    base = composite_gauss_legendre(n, -half_height, half_height, panels)
    return Quadrature(
        nodes=x0 + 1j * base.nodes,
        weights=1j * base.weights,
        domain="line",
        bounds=(float(x0), float(half_height)),
    )


def airy_ai(x):
    arr, scalar = real_input(x, "x")
    ai, _, _, _ = sp.airy(arr)
    return _result(ai, scalar)


def airy_ai_prime(x):
    arr, scalar = real_input(x, "x")
    _, aip, _, _ = sp.airy(arr)
    return _result(aip, scalar)


def airy_panel_rule(a, b):
    panels = max(1, int(np.ceil((b - a) / AIRY_PANEL_LENGTH)))
    return composite_gauss_legendre(AIRY_PANEL_ORDER, a, b, panels)


# [0, 40] 上的复合规则，多处复用
TAIL_RULE = airy_panel_rule(0.0, AIRY_TAIL_WINDOW)


def airy_tail(y):
    """
    ∫_y^∞ Ai(u) du.

    y >= 0 integrates [y, y + 40] directly; y < 0 adds ∫_y^0 Ai to the
    classical value 1/3, mapped onto [0, 1] so all points share one rule.
    """
    arr, scalar = real_input(y, "y")
    flat = np.atleast_1d(arr).ravel()
    out = np.empty_like(flat)
    pos = flat >= 0
    if np.any(pos):
        ai = sp.airy(flat[pos][:, None] + TAIL_RULE.nodes)[0]
        out[pos] = ai @ TAIL_RULE.weights
    neg = ~pos
    if np.any(neg):
        depth = -flat[neg]
        panels = max(1, int(np.ceil(depth.max() / AIRY_PANEL_LENGTH)))
        unit = composite_gauss_legendre(AIRY_PANEL_ORDER, 0.0, 1.0, panels)
        ai = sp.airy(-depth[:, None] * unit.nodes)[0]
        out[neg] = 1.0 / 3.0 + depth * (ai @ unit.weights)
    return _result(out.reshape(arr.shape), scalar)


def std_normal_cdf(s):
    arr, scalar = real_input(s, "s", allow_infinite=True)
    return _result(sp.ndtr(arr), scalar)


def hermite_functions(n, x):
    """
    Orthonormal oscillator functions psi_k(x), k < n.

    Parameters:
    - n: number of functions.
    - x: evaluation points (1-d).

    Returns:
    An (n, len(x)) array. The recurrence carries a per-point log scale so
    that psi_k stays representable far outside the oscillatory region.
    """
    xs, _ = real_input(x, "x")
    xs = np.atleast_1d(xs).ravel()
    out = np.zeros((n, xs.size))
    if n == 0:
        return out
    log_scale = -0.5 * xs ** 2 - 0.25 * np.log(np.pi)
    prev = np.zeros_like(xs)
    cur = np.ones_like(xs)
    out[0] = np.exp(log_scale)
    for k in range(1, n):
        nxt = np.sqrt(2.0 / k) * xs * cur - np.sqrt((k - 1) / k) * prev
        prev, cur = cur, nxt
        big = np.abs(cur) > 1e100
        if np.any(big):
            factor = np.abs(cur[big])
            cur[big] /= factor
            prev[big] /= factor
            log_scale[big] += np.log(factor)
        with np.errstate(under="ignore"):
            out[k] = cur * np.exp(log_scale)
    return out
