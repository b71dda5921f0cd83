"""
Multiple Hermite functions and the Hermite-function basis of the source
ensembles.
"""
import logging
from functools import lru_cache

import numpy as np
from scipy import linalg
from scipy.special import gammaln

from src.exceptions import DomainException, NumericException
from src.kernels.source import SourceSpec
from src.special import circle_rule, hermite_functions, real_input

logger = logging.getLogger(__name__)

RESIDUE_MIN_GAP = 0.25
CLUSTER_POINTS = 256
# 合并视为相同的 coherent 参数
CONFLUENCE_TOL = 1e-9


def _check_order(k, src: SourceSpec):
    if int(k) != k or k < 0 or k > src.n - 1:
        raise DomainException(f"k 超出范围：k={k}, N={src.n}")
    return int(k)


def _prime(src: SourceSpec):
    return src.array / np.sqrt(2.0)


def mh_first(k, src: SourceSpec, x):
    """
    F_{k,ε}(x) = k! 2^{k/2} ∮ dz/(2πi) e^{-z²/2+√2zx} / ∏_{l<=k+1} (z - ε'_l).

    Residue sum when the poles are well separated, otherwise a circle
    around the whole cluster.
    """
    k = _check_order(k, src)
    xs, scalar = real_input(x, "x")
    xs = np.atleast_1d(xs).ravel()
    poles = _prime(src)[: k + 1]
    prefactor = np.exp(gammaln(k + 1) + 0.5 * k * np.log(2.0))
    gaps = np.abs(poles[:, None] - poles[None, :])[~np.eye(k + 1, dtype=bool)]
    if k == 0 or gaps.min() >= RESIDUE_MIN_GAP:
        out = np.zeros_like(xs)
        for l, p in enumerate(poles):
            others = np.delete(poles, l)
            out += np.exp(-0.5 * p ** 2 + np.sqrt(2.0) * p * xs) / np.prod(p - others)
    else:
        center = poles.mean()
        rule = circle_rule(CLUSTER_POINTS, center, np.abs(poles - center).max() + 0.5)
        z = rule.nodes
        denom = np.prod(z[:, None] - poles[None, :], axis=1)
        integrand = np.exp(-0.5 * z[None, :] ** 2 + np.sqrt(2.0) * z[None, :] * xs[:, None])
        out = ((integrand / denom) @ rule.weights / (2j * np.pi)).real
    out = prefactor * out
    return float(out[0]) if scalar else out


@lru_cache(maxsize=16)
def _hermite_e(n):
    return np.polynomial.hermite_e.hermegauss(n)


def mh_second(k, src: SourceSpec, x):
    """
    G_{k,ε}(x), a degree-k polynomial, from the vertical line w = √2x + it.
    """
    k = _check_order(k, src)
    xs, scalar = real_input(x, "x")
    xs = np.atleast_1d(xs).ravel()
    t, w = _hermite_e(k // 2 + 2)
    shifted = np.sqrt(2.0) * xs[:, None] + 1j * t[None, :]
    prod = np.ones_like(shifted)
    for p in _prime(src)[:k]:
        prod = prod * (shifted - p)
    out = 2.0 ** (0.5 * k) / np.sqrt(2.0 * np.pi) * (prod @ w).real
    return float(out[0]) if scalar else out


def k_hermite(x, y, n):
    """Size-n GUE kernel sum_{k<n} psi_k(x) psi_k(y)."""
    px = hermite_functions(n, [x])[:, 0]
    py = hermite_functions(n, [y])[:, 0]
    return float(px @ py)


def _clusters(values):
    order = np.argsort(values, kind="stable")
    groups = []
    for v in values[order]:
        if groups and abs(v - groups[-1][0]) < CONFLUENCE_TOL:
            groups[-1][1] += 1
        else:
            groups.append([v, 1])
    return groups


def coherent_columns(values, size):
    """
    Columns spanning {a(e)}, a(e)_n = e^n / sqrt(n!), with derivative
    columns d^j a / de^j for repeated e. Each column is scaled to max 1.
    """
    n = np.arange(size)
    half_log_fact = 0.5 * gammaln(n + 1)
    cols = []
    for e, mult in _clusters(np.asarray(values, dtype=float)):
        for j in range(mult):
            m = n - j
            valid = m >= 0
            logs = np.full(size, -np.inf)
            sign = np.ones(size)
            if e == 0.0:
                logs[j] = half_log_fact[j]
            else:
                mv = m[valid]
                logs[valid] = (
                    gammaln(n[valid] + 1) - gammaln(mv + 1) - half_log_fact[valid]
                    + mv * np.log(abs(e))
                )
                if e < 0:
                    sign[valid] = np.where(mv % 2 == 0, 1.0, -1.0)
            col = sign * np.exp(logs - logs.max())
            cols.append(col)
    return np.column_stack(cols)


class SourceBasis:
    """
    Finite-N source kernel in the Hermite-function basis.

    The kernel is sum_{m<N} sum_k psi_m(x) e^{(m+1/2) t_r} B[k, m]
    e^{-(k+1/2) t_s} psi_k(y), minus the Mehler propagator when t_r < t_s.
    B spans the coherent vectors of the source and has an identity top
    block. `block` returns it conjugated by e^{(x²-y²)/2} (symmetric) and
    by e^{-N t} in time so every entry stays bounded.
    """

    def __init__(self, coherent):
        self.coherent = np.asarray(coherent, dtype=float)
        self.n = len(self.coherent)
        e_max = float(np.max(np.abs(self.coherent)))
        self.size = max(self.n, int(np.ceil(e_max ** 2))) + int(np.ceil(13.0 * e_max)) + 40
        a = coherent_columns(self.coherent, self.size)
        try:
            self.matrix = linalg.solve(a[: self.n].T, a.T).T
        except linalg.LinAlgError as e:
            raise NumericException(f"source 基矩阵奇异：{e}")
        if not np.all(np.isfinite(self.matrix)):
            raise NumericException("source 基矩阵出现非有限值")
        logger.debug(f"SourceBasis N={self.n} size={self.size}")

    @classmethod
    def static(cls, src: SourceSpec):
        """H + V with H ~ exp(-tr H²)."""
        return cls(np.sqrt(2.0) * src.array)

    @classmethod
    def dynamical(cls, src: SourceSpec):
        """Chain started from exp(-tr H² + tr V H)."""
        return cls(src.array / np.sqrt(2.0))

    def block(self, t_r, xs, t_s, ys):
        n = self.n
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        ys = np.atleast_1d(np.asarray(ys, dtype=float))
        m = np.arange(n)
        k = np.arange(n, self.size)
        px = hermite_functions(n, xs)
        py = hermite_functions(self.size, ys)
        left = px * np.exp((m - n + 0.5) * t_r)[:, None]
        lower = self.matrix[n:] * np.exp(-(k - n + 0.5) * t_s)[:, None]
        out = left.T @ (lower.T @ py[n:])
        if t_r >= t_s:
            top = px * np.exp((m - n + 0.5) * (t_r - t_s))[:, None]
            return out + top.T @ py[:n]
        delta = t_s - t_r
        if n * delta <= 20.0:
            top = px * np.exp((m - n + 0.5) * (t_r - t_s))[:, None]
            return out + top.T @ py[:n] - mehler(xs, ys, delta, shift=n)
        tail = n + int(np.ceil(40.0 / delta))
        px_all = hermite_functions(tail, xs)
        py_all = py if tail <= self.size else hermite_functions(tail, ys)
        j = np.arange(n, tail)
        damped = px_all[n:] * np.exp(-(j - n + 0.5) * delta)[:, None]
        return out - damped.T @ py_all[n:tail]

    def contour_gauge(self, t_r, xs, t_s, ys):
        """Same kernel in the gauge of the double-contour formulas."""
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        ys = np.atleast_1d(np.asarray(ys, dtype=float))
        factor = np.exp(
            self.n * (t_r - t_s) + 0.5 * (ys[None, :] ** 2 - xs[:, None] ** 2)
        )
        return self.block(t_r, xs, t_s, ys) * factor


def mehler(xs, ys, delta, shift=0):
    """
    e^{shift·delta} sum_k psi_k(x) psi_k(y) e^{-(k+1/2) delta}, closed form.
    """
    rho = np.exp(-delta)
    one_minus = -np.expm1(-2.0 * delta)
    x = xs[:, None]
    y = ys[None, :]
    expo = (
        -((1.0 + rho ** 2) * (x ** 2 + y ** 2) - 4.0 * rho * x * y) / (2.0 * one_minus)
        + shift * delta
        - 0.5 * delta
        - 0.5 * np.log(np.pi * one_minus)
    )
    return np.exp(expo)
