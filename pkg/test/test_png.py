import numpy as np
import pytest

from src.exceptions import ConsistencyException, DomainException
from src.png import (
    HeightField,
    MultiLayerField,
    PngParams,
    alpha_from_omega,
    draw_noise,
    evolve,
    evolve_multilayer,
    layer_summary,
    run,
    run_multilayer,
    sample_noise,
    scale_height_at,
    scaled_position,
    simulate_heights,
)
from src.utils import stream_rng
from src.worker.blocks import ks_against, reference_cdf
from src.worker.blocks.png_height import png_reference, sample_png_heights


def test_params_validation():
    with pytest.raises(DomainException):
        PngParams(q=0.0, alpha=1.0, n=4)
    with pytest.raises(DomainException):
        PngParams(q=0.25, alpha=0.4, n=4)
    with pytest.raises(DomainException):
        PngParams(q=0.25, alpha=2.0, n=4)
    with pytest.raises(DomainException):
        PngParams(q=0.25, alpha=1.0, n=0)
    assert PngParams(q=0.25, alpha=0.5, n=3).edge_p == pytest.approx(0.25)


def test_scaling_constants():
    const = PngParams(q=0.25, alpha=1.0, n=8).constants()
    assert const.a == pytest.approx(2.0)
    assert const.d == pytest.approx(1.8171, abs=1e-4)
    assert const.c == pytest.approx(1.6510, abs=1e-4)
    assert const.a_g is None
    boosted = PngParams(q=0.25, alpha=1.0 + 1e-7, n=8).constants()
    assert boosted.a_g == pytest.approx(const.a, abs=1e-5)


def test_alpha_from_omega():
    assert alpha_from_omega(0.0, 0.25, 8) == 1.0
    assert alpha_from_omega(1.0, 0.25, 8) < 1.0
    assert alpha_from_omega(-1.0, 0.25, 8) > 1.0


def test_evolve_with_explicit_noise():
    params = PngParams(q=0.25, alpha=1.0, n=2)
    field = HeightField(t=1, h=[0, 2, 0])
    nxt = evolve(field, params, noise=[0, 1, 0, 0, 0])
    assert nxt.t == 2
    assert list(nxt.h) == [0, 3, 2, 2, 0]
    assert nxt.at(5) == 0


def test_evolve_rejects_cone_violation():
    params = PngParams(q=0.25, alpha=1.0, n=2)
    field = HeightField(t=1, h=[0, 2, 0])
    with pytest.raises(ConsistencyException):
        evolve(field, params, noise=[1, 0, 0, 0, 0])
    with pytest.raises(DomainException):
        evolve(field, params, noise=[0, 0, 0])


def test_noise_only_on_odd_sites_inside_the_cone():
    params = PngParams(q=0.25, alpha=1.0, n=2)
    rng = np.random.default_rng(0)
    assert sample_noise(0, 2, params, rng) == 0
    assert sample_noise(2, 2, params, rng) == 0
    assert sample_noise(1, 2, params, rng) >= 0


def test_single_step_law():
    # N=1: h(0, 2) 只来自 t=1 时原点（边界位置）的成核
    params = PngParams(q=0.25, alpha=1.0, n=1)
    h0, _ = simulate_heights(params, 5, range(20000))
    assert np.mean(h0 == 0) == pytest.approx(0.5, abs=0.02)
    assert np.mean(h0) == pytest.approx(1.0, abs=0.05)


def test_batch_simulation_matches_single_runs():
    params = PngParams(q=0.25, alpha=0.8, n=8)
    taus = (0.0, 0.5)
    h0, scaled = simulate_heights(params, 3, range(40), taus)
    for stream in (0, 17, 39):
        field = run(params, 3, stream)
        assert field.at(0) == h0[stream]
        for k, tau in enumerate(taus):
            assert scale_height_at(field, tau, params) == pytest.approx(scaled[stream, k])


def test_scaled_position():
    params = PngParams(q=0.25, alpha=1.0, n=8)
    assert scaled_position(0.0, params) == 0
    assert scaled_position(0.5, params) % 2 == 0
    with pytest.raises(DomainException):
        scaled_position(3.0, params)


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_multilayer_ordering_and_interlacing(seed):
    params = PngParams(q=0.5, alpha=1.0, n=6)
    field = run_multilayer(params, seed, depth=4)
    layers = field.layers
    assert np.all(layers[:-1] >= layers[1:])
    padded = np.pad(layers, ((0, 0), (1, 1)))
    bound = np.minimum(padded[:-1, :-2], padded[:-1, 2:])
    assert np.all(layers[1:] <= bound)


def test_top_layer_is_the_single_layer_model():
    params = PngParams(q=0.25, alpha=1.2, n=6)
    field = run_multilayer(params, 9, depth=3, stream=4)
    assert list(field.layer(0).h) == list(run(params, 9, 4).h)


def test_run_uses_the_stream_generator():
    params = PngParams(q=0.25, alpha=1.1, n=5)
    rng = stream_rng(3, 5)
    field = HeightField.empty()
    for _ in range(params.final_time):
        field = evolve(field, params, rng)
    assert list(run(params, 3, 5).h) == list(field.h)


@pytest.mark.parametrize("stream", range(5))
def test_heights_grow_with_alpha_under_shared_randomness(stream):
    low = run(PngParams(q=0.25, alpha=0.9, n=20), 11, stream)
    high = run(PngParams(q=0.25, alpha=1.3, n=20), 11, stream)
    assert np.all(low.h <= high.h)


def test_one_extra_nucleation_raises_heights_by_at_most_one():
    params = PngParams(q=0.25, alpha=1.0, n=5)
    rng = np.random.default_rng(3)
    noises = [draw_noise(T, params, rng) for T in range(1, 11)]
    bumped = [noise.copy() for noise in noises]
    bumped[4][5] += 1
    plain, extra = HeightField.empty(), HeightField.empty()
    for a, b in zip(noises, bumped):
        plain = evolve(plain, params, noise=a)
        extra = evolve(extra, params, noise=b)
        diff = extra.h - plain.h
        assert np.all((diff == 0) | (diff == 1))
        if plain.t == 5:
            assert extra.at(0) == plain.at(0) + 1


def test_colliding_plateaus_nucleate_the_next_layer():
    params = PngParams(q=0.25, alpha=1.0, n=4)
    field = MultiLayerField(t=3, layers=[[0, 1, 0, 0, 0, 1, 0], [0] * 7])
    for T in (4, 5):
        field = evolve_multilayer(field, params, noise=np.zeros(2 * T + 1))
    assert list(field.layers[0]) == [0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0]
    assert list(field.layers[1]) == [0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0]


def test_isolated_plateau_leaves_lower_layers_empty():
    params = PngParams(q=0.25, alpha=1.0, n=4)
    field = MultiLayerField(t=1, layers=[[0, 2, 0], [0, 0, 0]])
    for T in range(2, 10):
        field = evolve_multilayer(field, params, noise=np.zeros(2 * T + 1))
    assert np.all(field.layers[1] == 0)
    assert field.layer(0).at(0) == 2


def test_many_layers_fill_at_the_critical_boundary():
    params = PngParams(q=0.25, alpha=1.0, n=100)
    field = run_multilayer(params, 2, depth=30)
    occupied = sum(row["width"] > 0 for row in layer_summary(field))
    assert occupied >= 5


def test_layer_summary():
    field = MultiLayerField(t=1, layers=[[0, 3, 0], [0, 0, 0]])
    rows = layer_summary(field)
    assert rows[0] == {"layer": 0, "h_origin": 3, "width": 1}
    assert rows[1] == {"layer": 1, "h_origin": 0, "width": 0}
    with pytest.raises(ConsistencyException):
        MultiLayerField(t=1, layers=[[0, 1]])


def test_reference_selection():
    assert png_reference(0.9, None) == "F2"
    assert png_reference(1.0, None) == "GOE2"
    assert png_reference(1.5, None) == "GAUSS"
    assert png_reference(1.0, None, tau=0.5) == "TRANSITION"
    assert png_reference(0.95, 1.0) == "TRANSITION"


@pytest.mark.slow
@pytest.mark.parametrize("alpha, reference, column, tolerance", [
    (0.9, "F2", "H_0", 0.1),
    (1.0, "GOE2", "H_0", 0.1),
    (1.5, "GAUSS", "HG", 0.05),
])
def test_scaled_height_law(alpha, reference, column, tolerance):
    params = {"q": 0.25, "alpha": alpha, "N": 256, "taus": [0.0]}
    table = sample_png_heights(params, 7, list(range(20000)))
    cdf = reference_cdf(reference, 48)
    assert ks_against(table[column].to_numpy(), cdf) < tolerance
