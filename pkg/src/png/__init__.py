"""
Discrete polynuclear growth (PNG) droplet with a boosted nucleation rate at
its left edge, the multi-layer extension and edge-scaled observables.

Heights live on r in [-t, t]; nucleations occur at |r| < t with t - r odd,
and the site r = -t + 1 uses the edge parameter alpha * sqrt(q).
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.exceptions import ConsistencyException, DomainException
from src.utils import stream_rng

logger = logging.getLogger(__name__)

# 批量模拟时每批轨迹数，限制预先抽取的均匀随机数占用内存
BATCH = 32


@dataclass(frozen=True)
class ScalingConstants:
    a: float
    d: float
    c: float
    a_g: Optional[float] = None
    d_g: Optional[float] = None


@dataclass(frozen=True)
class PngParams:
    q: float
    alpha: float
    n: int

    def __post_init__(self):
        if not 0 < self.q < 1:
            raise DomainException(f"q 必须在 (0, 1) 内：{self.q}", q=self.q)
        root = np.sqrt(self.q)
        if not root <= self.alpha < 1.0 / root:
            raise DomainException(
                f"alpha 必须在 [√q, 1/√q) 内：alpha={self.alpha}, q={self.q}",
                alpha=self.alpha,
            )
        if int(self.n) != self.n or self.n < 1:
            raise DomainException(f"N 必须是正整数：{self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def edge_p(self):
        return self.alpha * np.sqrt(self.q)

    @property
    def final_time(self):
        return 2 * self.n

    def constants(self) -> ScalingConstants:
        q, alpha = self.q, self.alpha
        root = np.sqrt(q)
        a = 2.0 * root / (1.0 - root)
        d = (1.0 + root) ** (1.0 / 3.0) * q ** (1.0 / 6.0) / (1.0 - root)
        c = (1.0 + root) ** (2.0 / 3.0) / q ** (1.0 / 6.0)
        if alpha <= 1.0:
            return ScalingConstants(a=a, d=d, c=c)
        den = (alpha - root) * (1.0 - alpha * root)
        a_g = root * (1.0 - 2.0 * alpha * root + alpha ** 2) / den
        d_g = (
            np.sqrt(alpha) * q ** 0.25 * np.sqrt(1.0 - q) * np.sqrt(alpha ** 2 - 1.0) / den
        )
        return ScalingConstants(a=a, d=d, c=c, a_g=a_g, d_g=d_g)


def alpha_from_omega(omega, q, n):
    """Source strength tuned to the critical window: alpha = 1 - omega / (d N^{1/3})."""
    d = PngParams(q=q, alpha=1.0, n=n).constants().d
    return 1.0 - omega / (d * n ** (1.0 / 3.0))


@dataclass(frozen=True)
class HeightField:
    t: int
    h: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.h, dtype=np.int64)
        if h.shape != (2 * self.t + 1,):
            raise ConsistencyException(f"高度数组长度应为 {2 * self.t + 1}，实际 {h.shape}")
        h.flags.writeable = False
        object.__setattr__(self, "h", h)

    @classmethod
    def empty(cls, t=0):
        return cls(t=t, h=np.zeros(2 * t + 1, dtype=np.int64))

    def at(self, r):
        if abs(r) > self.t:
            return 0
        return int(self.h[r + self.t])

    @property
    def positions(self):
        return np.arange(-self.t, self.t + 1)


@dataclass(frozen=True)
class MultiLayerField:
    t: int
    layers: np.ndarray

    def __post_init__(self):
        layers = np.asarray(self.layers, dtype=np.int64)
        if layers.ndim != 2 or layers.shape[1] != 2 * self.t + 1:
            raise ConsistencyException(f"多层高度数组形状不正确：{layers.shape}")
        layers.flags.writeable = False
        object.__setattr__(self, "layers", layers)

    @classmethod
    def empty(cls, depth, t=0):
        return cls(t=t, layers=np.zeros((depth, 2 * t + 1), dtype=np.int64))

    @property
    def depth(self):
        return self.layers.shape[0]

    def layer(self, index) -> HeightField:
        return HeightField(t=self.t, h=self.layers[index])


def _eligible(T):
    """Nucleation sites at time T in ascending r."""
    r = np.arange(-T + 1, T, 2)
    return r


def _site_params(T, params: PngParams):
    p = np.full(T, params.q)
    p[0] = params.edge_p
    return p


def geometric_from_uniform(u, p):
    """Inverse-CDF geometric draw with P[k] = (1 - p) p^k, u in (0, 1]."""
    return np.floor(np.log(u) / np.log(p)).astype(np.int64)


def sample_noise(r, t, params: PngParams, rng):
    if t - abs(r) <= 0 or (t - r) % 2 == 0:
        return 0
    p = params.edge_p if r == -t + 1 else params.q
    return int(geometric_from_uniform(1.0 - rng.random(), p))


def draw_noise(T, params: PngParams, rng):
    """All nucleations omega(r, T), r in [-T, T]."""
    noise = np.zeros(2 * T + 1, dtype=np.int64)
    r = _eligible(T)
    noise[r + T] = geometric_from_uniform(1.0 - rng.random(r.size), _site_params(T, params))
    return noise


def _spread(h):
    padded = np.zeros(h.shape[:-1] + (h.shape[-1] + 4,), dtype=np.int64)
    padded[..., 2:-2] = h
    return np.maximum(np.maximum(padded[..., :-2], padded[..., 1:-1]), padded[..., 2:])


def _check_cone(h, t):
    if h.shape[-1] > 1 and (np.any(h[..., 0] != 0) or np.any(h[..., -1] != 0)):
        raise ConsistencyException(f"光锥约束被破坏：t={t}")
    if np.any(h < 0):
        raise ConsistencyException(f"出现负高度：t={t}")


def evolve(field: HeightField, params: PngParams, rng=None, noise=None) -> HeightField:
    """
    h(r, t+1) = max(h(r-1, t), h(r, t), h(r+1, t)) + omega(r, t+1).

    noise, when given, replaces the random nucleations and must cover
    r in [-t-1, t+1].
    """
    T = field.t + 1
    if noise is None:
        noise = draw_noise(T, params, rng)
    noise = np.asarray(noise, dtype=np.int64)
    if noise.shape != (2 * T + 1,):
        raise DomainException(f"noise 长度应为 {2 * T + 1}")
    h = _spread(field.h) + noise
    _check_cone(h, T)
    return HeightField(t=T, h=h)


def run(params: PngParams, seed, stream=0) -> HeightField:
    """Droplet at t = 2N from the flat start; sample `stream` of `seed`."""
    rng = stream_rng(seed, stream)
    field = HeightField.empty()
    for _ in range(params.final_time):
        field = evolve(field, params, rng)
    return field


def absorbed(upper):
    """Overlap lost when two fronts of the layer above collide."""
    padded = np.zeros(upper.shape[:-1] + (upper.shape[-1] + 2,), dtype=np.int64)
    padded[..., 1:-1] = upper
    return np.maximum(0, np.minimum(padded[..., :-2], padded[..., 2:]) - upper)


def evolve_multilayer(field: MultiLayerField, params: PngParams, rng=None, noise=None):
    T = field.t + 1
    if noise is None:
        noise = draw_noise(T, params, rng)
    noise = np.asarray(noise, dtype=np.int64)
    old = field.layers
    fresh = np.zeros((field.depth, 2 * T + 1), dtype=np.int64)
    fresh[0] = noise
    if field.depth > 1:
        fresh[1:, 1:-1] = absorbed(old[:-1])
    layers = _spread(old) + fresh
    _check_cone(layers, T)
    if np.any(layers[:-1] < layers[1:]):
        raise ConsistencyException(f"多层高度顺序被破坏：t={T}")
    return MultiLayerField(t=T, layers=layers)


def run_multilayer(params: PngParams, seed, depth, stream=0, steps=None) -> MultiLayerField:
    rng = stream_rng(seed, stream)
    field = MultiLayerField.empty(depth)
    for _ in range(params.final_time if steps is None else steps):
        field = evolve_multilayer(field, params, rng)
    return field


def layer_summary(field: MultiLayerField):
    rows = []
    for index in range(field.depth):
        layer = field.layers[index]
        rows.append({
            "layer": index,
            "h_origin": int(layer[field.t]),
            "width": int(np.count_nonzero(layer)),
        })
    return rows


def scale_height(h0, params: PngParams):
    const = params.constants()
    n = params.n
    return (h0 - const.a * n) / (const.d * n ** (1.0 / 3.0))


def scale_height_gaussian(h0, params: PngParams):
    const = params.constants()
    if const.d_g is None:
        raise DomainException(f"高斯标度要求 alpha > 1，当前 alpha={params.alpha}")
    n = params.n
    return (h0 - const.a_g * n) / (const.d_g * np.sqrt(n))


def scaled_position(tau, params: PngParams):
    """Lattice site for scaled position tau, snapped to even r."""
    const = params.constants()
    r = 2 * int(np.round(const.c * params.n ** (2.0 / 3.0) * tau))
    if abs(r) >= params.final_time:
        raise DomainException(f"τ={tau} 对应的位置 r={r} 超出光锥", tau=tau)
    return r


def scale_height_at(field: HeightField, tau, params: PngParams):
    r = scaled_position(tau, params)
    return scale_height(field.at(r), params) + tau ** 2


def simulate_heights(params: PngParams, seed, streams, taus=()):
    """
    Run one trajectory per stream index and collect h(0, 2N) and the
    scaled heights at each tau.

    Each stream draws the same uniforms, in the same order, as `run`, so
    results match the single-trajectory path exactly.
    """
    streams = list(streams)
    taus = [float(t) for t in taus]
    positions = [scaled_position(tau, params) for tau in taus]
    T_final = params.final_time
    total = T_final * (T_final + 1) // 2
    h0 = np.empty(len(streams), dtype=np.int64)
    at_tau = np.empty((len(streams), len(taus)), dtype=np.int64)
    for start in range(0, len(streams), BATCH):
        chunk = streams[start:start + BATCH]
        uniforms = np.stack([
            1.0 - stream_rng(seed, s).random(total) for s in chunk
        ])
        h = np.zeros((len(chunk), 1), dtype=np.int64)
        offset = 0
        for T in range(1, T_final + 1):
            r = _eligible(T)
            noise = np.zeros((len(chunk), 2 * T + 1), dtype=np.int64)
            noise[:, r + T] = geometric_from_uniform(
                uniforms[:, offset:offset + T], _site_params(T, params)[None, :]
            )
            offset += T
            h = _spread(h) + noise
        h0[start:start + len(chunk)] = h[:, T_final]
        for k, r in enumerate(positions):
            at_tau[start:start + len(chunk), k] = h[:, r + T_final]
        logger.debug(f"PNG 批次完成：streams {chunk[0]}..{chunk[-1]}")
    scaled = np.column_stack([
        scale_height(at_tau[:, k], params) + tau ** 2 for k, tau in enumerate(taus)
    ]) if taus else np.empty((len(streams), 0))
    return h0, scaled


__all__ = [
    "HeightField",
    "MultiLayerField",
    "PngParams",
    "ScalingConstants",
    "absorbed",
    "alpha_from_omega",
    "evolve",
    "evolve_multilayer",
    "layer_summary",
    "run",
    "run_multilayer",
    "sample_noise",
    "scale_height",
    "scale_height_at",
    "scale_height_gaussian",
    "scaled_position",
    "simulate_heights",
]
