"""
Airy-type limiting kernels: the Airy kernel, its rank-1 GOE^2 deformation,
the extended (multi-time) Airy kernel and the GOE^2 -> GUE transition kernel.

Every kernel has a block form taking coordinate vectors and returning the
full matrix; the scalar operations are thin wrappers around it.
"""
import numpy as np
from scipy import special as sp

from src.exceptions import DomainException
from src.kernels.source import SpaceTimePoint
from src.special import (
    AIRY_TAIL_WINDOW,
    TAIL_RULE,
    airy_panel_rule,
    real_input,
    airy_tail,
)

NEGATIVE_RULE = airy_panel_rule(-AIRY_TAIL_WINDOW, 0.0)


def _coords(values, name):
    arr, _ = real_input(values, name)
    return np.atleast_1d(arr).ravel()


def _ai_on(xs, nodes):
    return sp.airy(xs[:, None] + nodes[None, :])[0]


def _weighted_product(xs, ys, rule, damping=None):
    w = rule.weights if damping is None else rule.weights * damping
    return (_ai_on(xs, rule.nodes) * w) @ _ai_on(ys, rule.nodes).T


def k2_block(xs, ys):
    xs, ys = _coords(xs, "x"), _coords(ys, "y")
    return _weighted_product(xs, ys, TAIL_RULE)


def k12_block(xs, ys):
    xs, ys = _coords(xs, "x"), _coords(ys, "y")
    rank_one = np.outer(sp.airy(xs)[0], 1.0 - airy_tail(ys))
    return _weighted_product(xs, ys, TAIL_RULE) + rank_one


def bilateral_integral(xs, ys, s):
    """∫_R e^{sλ} Ai(x+λ) Ai(y+λ) dλ for s > 0 in closed form."""
    x = xs[:, None]
    y = ys[None, :]
    expo = s ** 3 / 12.0 - 0.5 * (x + y) * s - (x - y) ** 2 / (4.0 * s)
    return np.exp(expo) / np.sqrt(4.0 * np.pi * s)


def k2_ext_block(tau_r, xs, tau_s, ys):
    xs, ys = _coords(xs, "xi1"), _coords(ys, "xi2")
    delta = float(tau_r) - float(tau_s)
    if delta >= 0:
        return _weighted_product(xs, ys, TAIL_RULE, np.exp(-delta * TAIL_RULE.nodes))
    s = -delta
    if s >= 1.0:
        return -_weighted_product(
            xs, ys, NEGATIVE_RULE, np.exp(s * NEGATIVE_RULE.nodes)
        )
    # 小时间间隔：正半轴积分减去整条实轴上的闭式
    forward = _weighted_product(xs, ys, TAIL_RULE, np.exp(s * TAIL_RULE.nodes))
    return forward - bilateral_integral(xs, ys, s)


def transition_tail(ys, c):
    """
    ∫_0^∞ e^{-cλ} Ai(ξ - λ) dλ for c >= 0.

    For c < 1 the slowly damped oscillatory tail is replaced by the Airy
    Laplace transform e^{c^3/3 - cξ} minus the right half-line part.
    """
    ys = _coords(ys, "xi")
    if c >= 1.0:
        nodes = TAIL_RULE.nodes
        ai = sp.airy(ys[:, None] - nodes[None, :])[0]
        return ai @ (TAIL_RULE.weights * np.exp(-c * nodes))
    nodes = TAIL_RULE.nodes
    ai = sp.airy(ys[:, None] + nodes[None, :])[0]
    right = ai @ (TAIL_RULE.weights * np.exp(c * nodes))
    return np.exp(c ** 3 / 3.0 - c * ys) - right


def check_transition(omega, tau_s):
    c = float(omega) + float(tau_s)
    if c < 0 or (c == 0 and not (omega == 0 and tau_s == 0)):
        raise DomainException(
            f"ω+τ₂ 必须大于 0（或 ω=τ₂=0），当前 ω={omega}, τ₂={tau_s}",
            omega=omega,
            tau=tau_s,
        )
    return c


def k_transition_block(tau_r, xs, tau_s, ys, omega):
    c = check_transition(omega, tau_s)
    xs, ys = _coords(xs, "xi1"), _coords(ys, "xi2")
    rank_one = np.outer(sp.airy(xs)[0], transition_tail(ys, c))
    return k2_ext_block(tau_r, xs, tau_s, ys) + rank_one


def k2(x, y):
    return float(k2_block([x], [y])[0, 0])


def k12(x, y):
    return float(k12_block([x], [y])[0, 0])


def k2_christoffel_darboux(x, y):
    """
    Closed form of the Airy kernel; diagonal Ai'(x)^2 - x Ai(x)^2.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ax, apx, _, _ = sp.airy(x)
    ay, apy, _, _ = sp.airy(y)
    near = np.abs(x - y) < 1e-8
    denom = np.where(near, 1.0, x - y)
    off = (ax * apy - apx * ay) / denom
    diag = apx ** 2 - x * ax ** 2
    out = np.where(near, diag, off)
    return float(out) if out.ndim == 0 else out


def k2_ext(p1: SpaceTimePoint, p2: SpaceTimePoint):
    return float(k2_ext_block(p1.tau, [p1.xi], p2.tau, [p2.xi])[0, 0])


def k_transition(p1: SpaceTimePoint, p2: SpaceTimePoint, omega):
    return float(k_transition_block(p1.tau, [p1.xi], p2.tau, [p2.xi], omega)[0, 0])
