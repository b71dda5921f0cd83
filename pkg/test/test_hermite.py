import numpy as np
import pytest
from numpy.polynomial import hermite

from src.exceptions import ConfigException, DomainException, NumericException
from src.kernels import (
    ContourParams,
    ExtendedKernel,
    SourceBasis,
    SourceSpec,
    k_finite_dyn,
    k12_block,
    k2_block,
    k_finite_static,
    k_hermite,
    k_transition_block,
    mh_first,
    mh_second,
)
from src.kernels.finite import dynamical_contour_block, static_contour_block
from src.special import hermite_functions

XS = np.array([-1.0, 0.5, 2.0])


def _physicists(k, x):
    return hermite.hermval(x, [0] * k + [1])


@pytest.mark.parametrize("k", range(6))
def test_zero_source_gives_hermite_polynomials(k):
    src = SourceSpec.zero(6)
    x = np.linspace(-3.0, 3.0, 7)
    scale = max(1.0, np.max(np.abs(_physicists(k, x))))
    assert np.max(np.abs(mh_first(k, src, x) - _physicists(k, x))) < 1e-9 * scale
    assert np.max(np.abs(mh_second(k, src, x) - _physicists(k, x))) < 1e-9 * scale


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_multiple_hermite_biorthogonality(seed):
    eps = np.random.default_rng(seed).uniform(-1.0, 1.0, 7)
    src = SourceSpec.from_list(eps)
    nodes, weights = hermite.hermgauss(120)
    first = np.array([mh_first(j, src, nodes) for j in range(7)])
    second = np.array([mh_second(k, src, nodes) for k in range(7)])
    gram = (first * weights) @ second.T
    for j in range(7):
        for k in range(7):
            norm = np.sqrt(np.pi) * 2.0 ** max(j, k) * np.prod(np.arange(1, max(j, k) + 1))
            expected = norm if j == k else 0.0
            assert abs(gram[j, k] - expected) < 1e-8 * norm


def test_multiple_hermite_order_range():
    src = SourceSpec.zero(3)
    with pytest.raises(DomainException):
        mh_first(3, src, 0.0)
    with pytest.raises(DomainException):
        mh_second(-1, src, 0.0)


def test_k_hermite_is_sum_of_squares():
    psi = hermite_functions(5, [0.3])[:, 0]
    assert k_hermite(0.3, 0.3, 5) == pytest.approx(np.sum(psi ** 2), rel=1e-14)


def test_zero_source_basis_is_gue_kernel():
    basis = SourceBasis.static(SourceSpec.zero(4))
    block = basis.block(0.0, XS, 0.0, XS)
    expected = np.array([[k_hermite(x, y, 4) for y in XS] for x in XS])
    assert np.max(np.abs(block - expected)) < 1e-12


@pytest.mark.parametrize("eps", [0.0, 1.2])
def test_single_matrix_static_kernel(eps):
    src = SourceSpec.from_list([eps])
    for x, y in [(0.0, 0.0), (-0.7, 1.1), (1.5, 0.4)]:
        expected = np.exp(-x ** 2 + 2.0 * eps * y - eps ** 2) / np.sqrt(np.pi)
        assert k_finite_static(x, y, src) == pytest.approx(expected, abs=1e-8)
        basis = SourceBasis.static(src).contour_gauge(0.0, [x], 0.0, [y])[0, 0]
        assert basis == pytest.approx(expected, abs=1e-10)


def test_static_contour_matches_basis():
    src = SourceSpec.from_list([1.0, -0.5, 0.0])
    contour = static_contour_block(XS, XS, src)
    basis = SourceBasis.static(src).contour_gauge(0.0, XS, 0.0, XS)
    assert np.max(np.abs(contour - basis)) < 1e-7


@pytest.mark.parametrize("t_r, t_s", [(0.0, 0.0), (0.0, 0.7), (0.7, 0.0), (0.7, 0.7)])
def test_dynamical_contour_matches_basis(t_r, t_s):
    src = SourceSpec.from_list([1.0, 0.0])
    contour = dynamical_contour_block(t_r, XS, t_s, XS, src)
    basis = SourceBasis.dynamical(src).contour_gauge(t_r, XS, t_s, XS)
    assert np.max(np.abs(contour - basis)) < 1e-7


def test_dynamical_kernel_at_time_zero_is_static_with_half_source():
    src = SourceSpec.from_list([1.6, -0.4, 0.0])
    for x, y in [(0.2, -0.3), (1.0, 1.4)]:
        assert k_finite_dyn(0.0, x, 0.0, y, src) == pytest.approx(
            k_finite_static(x, y, src.halved()), abs=1e-8
        )


def test_contour_refinement_is_stable():
    src = SourceSpec.from_list([0.8, 0.0])
    params = ContourParams()
    coarse = k_finite_dyn(0.0, 0.4, 0.7, -0.2, src, params, method="contour")
    fine = k_finite_dyn(0.0, 0.4, 0.7, -0.2, src, params.refined(), method="contour")
    assert coarse == pytest.approx(fine, abs=1e-9)


def test_contour_geometry_is_checked():
    src = SourceSpec.from_list([1.0, 0.0])
    with pytest.raises(ConfigException):
        k_finite_static(0.0, 0.0, src, ContourParams(center=0.5, radius=0.2), method="contour")


def test_basis_methods_agree_on_the_diagonal():
    src = SourceSpec.from_list([1.0, -0.5, 0.0])
    hermite_kernel = ExtendedKernel.finite_static(src)
    contour_kernel = ExtendedKernel.finite_static(src, method="contour")
    a = np.diag(hermite_kernel.block(0.0, XS, 0.0, XS))
    b = np.diag(contour_kernel.block(0.0, XS, 0.0, XS))
    assert np.max(np.abs(a - b)) < 1e-7


def _edge_points(n, xi):
    return np.sqrt(2.0 * n) + xi / (np.sqrt(2.0) * n ** (1.0 / 6.0))


@pytest.mark.parametrize("n, expected, tolerance", [
    (8, 0.54718, 5e-5),
    (16, 0.6287, 5e-4),
    (30, 0.7098, 5e-4),
])
def test_static_kernel_at_the_soft_edge(n, expected, tolerance):
    src = SourceSpec.from_lambda(n, 1.0)
    x = np.sqrt(2.0 * n)
    assert k_finite_static(x, x, src) == pytest.approx(expected, abs=tolerance)


def test_contour_reports_cancellation_instead_of_garbage():
    n = 30
    src = SourceSpec.from_lambda(n, 1.0)
    x = np.sqrt(2.0 * n)
    with pytest.raises(NumericException):
        k_finite_static(x, x, src, method="contour")


def test_unknown_kernel_method():
    with pytest.raises(ConfigException):
        k_finite_static(0.0, 0.0, SourceSpec.zero(2), method="series")


def test_chain_kernel_at_large_n_on_the_edge():
    n = 600
    src = SourceSpec.from_omega(n, 0.0)
    xi = np.array([-1.0, 0.0, 1.0])
    jacobian = 1.0 / (np.sqrt(2.0) * n ** (1.0 / 6.0))
    values = np.array([k_finite_dyn(0.0, x, 0.0, x, src) for x in _edge_points(n, xi)]) * jacobian
    assert np.all(np.isfinite(values))
    assert np.all(np.diff(values) < 0)
    kernel = ExtendedKernel.finite_dynamical(src, (0.0,), edge=True)
    assert np.allclose(values, np.diag(kernel.block(0.0, xi, 0.0, xi)), rtol=1e-10)
    limit = np.diag(k_transition_block(0.0, xi, 0.0, xi, 0.0))
    assert np.max(np.abs(values - limit)) < 0.05


@pytest.mark.parametrize("lam, limit, tolerance", [(0.5, k2_block, 0.05), (1.0, k12_block, 0.1)])
def test_edge_scaled_static_kernel_approaches_its_limit(lam, limit, tolerance):
    xi = np.linspace(-1.0, 1.0, 5)
    expected = np.diag(limit(xi, xi))
    gaps = []
    for n in (200, 800):
        kernel = ExtendedKernel.finite_static(SourceSpec.from_lambda(n, lam), edge=True)
        gaps.append(np.max(np.abs(np.diag(kernel.block(0.0, xi, 0.0, xi)) - expected)))
    assert gaps[1] < gaps[0]
    assert gaps[1] < tolerance


@pytest.mark.parametrize("params", [
    ContourParams(h=0.15),
    ContourParams(h=0.4, center=0.25, radius=1.0),
    ContourParams(circle_points=384, line_order=32),
])
def test_static_contour_does_not_depend_on_geometry(params):
    src = SourceSpec.from_list([1.0, -0.5, 0.0])
    reference = k_finite_static(0.3, -0.4, src, method="contour")
    assert k_finite_static(0.3, -0.4, src, params, method="contour") == pytest.approx(
        reference, abs=1e-8
    )


@pytest.mark.parametrize("params", [ContourParams(h=0.15), ContourParams(h=0.4)])
def test_dynamical_contour_does_not_depend_on_geometry(params):
    src = SourceSpec.from_list([0.8, 0.0])
    for t_r, t_s in [(0.0, 0.7), (0.7, 0.0)]:
        reference = k_finite_dyn(t_r, 0.4, t_s, -0.2, src, method="contour")
        assert k_finite_dyn(t_r, 0.4, t_s, -0.2, src, params, method="contour") == pytest.approx(
            reference, abs=1e-8
        )


def test_minors_do_not_depend_on_the_gauge():
    src = SourceSpec.from_list([1.0, -0.5, 0.0])
    basis = SourceBasis.static(src)
    symmetric = basis.block(0.0, XS, 0.0, XS)
    gauged = basis.contour_gauge(0.0, XS, 0.0, XS)
    contour = static_contour_block(XS, XS, src)
    for idx in ([0, 1], [1, 2], [0, 2], [0, 1, 2]):
        sub = np.ix_(idx, idx)
        det = np.linalg.det(symmetric[sub])
        assert np.linalg.det(gauged[sub]) == pytest.approx(det, rel=1e-9, abs=1e-12)
        assert np.linalg.det(contour[sub]) == pytest.approx(det, abs=1e-6)


def test_two_time_minor_does_not_depend_on_the_gauge():
    src = SourceSpec.from_list([1.0, 0.0])
    basis = SourceBasis.dynamical(src)
    points = [(0.0, 0.5), (0.7, -1.0)]

    def matrix(kernel):
        return np.array([[kernel(t_r, [x], t_s, [y])[0, 0] for t_s, y in points] for t_r, x in points])

    det = np.linalg.det(matrix(basis.block))
    assert np.linalg.det(matrix(basis.contour_gauge)) == pytest.approx(det, rel=1e-9, abs=1e-12)


@pytest.mark.slow
def test_edge_scaled_chain_kernel_approaches_transition_kernel():
    n = 600
    kernel = ExtendedKernel.finite_dynamical(SourceSpec.from_omega(n, 0.0), (0.0,), edge=True)
    xi = np.array([-1.0, 0.0, 1.0, 2.0])
    finite = kernel.block(0.0, xi, 0.0, xi)
    limit = k_transition_block(0.0, xi, 0.0, xi, 0.0)
    assert np.max(np.abs(np.diag(finite) - np.diag(limit))) < 0.05
    # K(ξ,η)K(η,ξ) 与共轭无关
    assert np.max(np.abs(finite * finite.T - limit * limit.T)) < 0.05
