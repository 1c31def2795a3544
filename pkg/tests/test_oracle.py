import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import cosm

from paratransmon.coupling import CoupledPair
from paratransmon.errors import LabelingError, OracleError, PhysicsError
from paratransmon.oracle import (
    build_coupled,
    build_single,
    chi_numeric,
    coupled_levels,
    cos_phase_matrix,
    diagonalize,
    dressed_labels,
)
from paratransmon.tunable import TransmonSpec


def e_j(E_C, xi):
    return 2 * E_C / xi**2


def fig5_pair(g_C=0.0):
    return CoupledPair(TransmonSpec.fixed(200.0, 0.18), TransmonSpec.fixed(200.0, 0.175), g_C)


@pytest.mark.parametrize("xi", [0.05, 0.2, 0.35])
def test_cos_matrix_matches_matrix_cosine(xi):
    big = 200
    s = np.sqrt(np.arange(1, big))
    phi = math.sqrt(xi) * (np.diag(s, 1) + np.diag(s, -1))
    ref = cosm(phi)[:30, :30]
    np.testing.assert_allclose(cos_phase_matrix(xi, 30), ref, atol=1e-13)


def test_diagonalize_small_examples():
    np.testing.assert_allclose(diagonalize(np.diag([1.0, 2.0, 3.0])).eigenvalues, [1, 2, 3])
    np.testing.assert_allclose(diagonalize(np.array([[0.0, 1.0], [1.0, 0.0]])).eigenvalues, [-1, 1])


def test_diagonalize_rejects_asymmetric():
    with pytest.raises(OracleError):
        diagonalize(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_fig2_transmon_frequency_and_anharmonicity():
    s = diagonalize(build_single(200.0, e_j(200.0, 0.2)))
    omega = s.transition(0, 1)
    eta = omega - s.transition(1, 2)
    assert round(omega) == 3788
    assert round(eta) == 230


def test_fig4_maximum_frequency():
    s = diagonalize(build_single(200.0, e_j(200.0, 0.16)))
    assert round(s.transition(0, 1)) == 4791


def test_harmonic_limit():
    # with the cosine replaced by its quadratic part the spectrum is equally spaced by sqrt(8 E_C E_J)
    E_C, E_J, d = 200.0, e_j(200.0, 0.1), 40
    h = build_single(E_C, E_J, d).matrix + E_J * cos_phase_matrix(0.1, d)
    s = np.sqrt(np.arange(1, d))
    x = np.diag(s, 1) + np.diag(s, -1)
    quad = -E_J * (np.eye(d) - 0.1 * (x @ x)[:d, :d] / 2)
    vals = diagonalize(0.5 * ((h + quad) + (h + quad).T)).eigenvalues
    np.testing.assert_allclose(np.diff(vals[:10]), math.sqrt(8 * E_C * E_J), rtol=1e-10)


def test_eigenvectors_orthonormal_with_positive_leading_component():
    s = diagonalize(build_single(200.0, e_j(200.0, 0.2)))
    v = s.eigenvectors
    np.testing.assert_allclose(v.T @ v, np.eye(v.shape[1]), atol=1e-12)
    idx = np.argmax(np.abs(v), axis=0)
    assert np.all(v[idx, np.arange(v.shape[1])] > 0)
    assert np.all(np.diff(s.eigenvalues) > 0)


def test_energy_guards_and_warnings():
    with pytest.raises(PhysicsError):
        build_single(0.0, 1000.0)
    with pytest.raises(PhysicsError):
        build_single(200.0, -1.0)
    with pytest.warns(RuntimeWarning, match="xi"):
        build_single(200.0, e_j(200.0, 0.35))
    with pytest.warns(RuntimeWarning, match="dimension"):
        build_single(200.0, e_j(200.0, 0.2), 10)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        build_single(200.0, e_j(200.0, 0.2))


@pytest.mark.filterwarnings("ignore:dimension 12")
def test_uncoupled_pair_is_tensor_sum():
    pair = fig5_pair(0.0)
    coupled = build_coupled(pair, 12)
    vals = diagonalize(coupled.matrix).eigenvalues
    a, b = coupled.bare_first.eigenvalues, coupled.bare_second.eigenvalues
    expected = np.sort(np.add.outer(a, b).ravel())
    np.testing.assert_allclose(vals, expected, atol=1e-9, rtol=0)


def test_uncoupled_labels_and_zero_chi():
    labels, coupled = coupled_levels(fig5_pair(0.0), 15)
    a, b = coupled.bare_first.eigenvalues, coupled.bare_second.eigenvalues
    for (i, j), e in labels.items():
        assert e == pytest.approx(a[i] + b[j], abs=1e-9)
    assert abs(chi_numeric(labels)) < 1e-9


def test_fig5_bare_parameters():
    labels, coupled = coupled_levels(fig5_pair(0.0), 30)
    w1 = coupled.bare_first.transition(0, 1)
    w2 = coupled.bare_second.transition(0, 1)
    eta1 = w1 - coupled.bare_first.transition(1, 2)
    eta2 = w2 - coupled.bare_second.transition(1, 2)
    assert (round(w1), round(w2), round(eta1), round(eta2)) == (4234, 4361, 226, 225)


def test_swapped_pair_transposes_labels():
    pair = fig5_pair(8.0)
    labels, _ = coupled_levels(pair, 15)
    swapped, _ = coupled_levels(pair.swapped(), 15)
    for (i, j), e in labels.items():
        assert swapped[(j, i)] == pytest.approx(e, abs=1e-8)
    assert chi_numeric(swapped) == pytest.approx(chi_numeric(labels), abs=1e-8)


def test_chi_scales_as_coupling_squared_at_small_g():
    chis = [chi_numeric(coupled_levels(fig5_pair(g), 15)[0]) for g in (0.5, 1.0)]
    assert chis[1] / chis[0] == pytest.approx(4.0, rel=1e-3)


@pytest.mark.filterwarnings("ignore:dimension 12")
def test_resonant_pair_labeling_fails():
    pair = CoupledPair(TransmonSpec.fixed(200.0, 0.18), TransmonSpec.fixed(200.0, 0.18), 20.0)
    coupled = build_coupled(pair, 12)
    with pytest.raises(LabelingError, match="near-resonant"):
        dressed_labels(diagonalize(coupled.matrix), coupled)


def test_product_dimension_guard():
    with pytest.raises(OracleError):
        build_coupled(fig5_pair(1.0), 65)


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=0.02, max_value=0.3), st.integers(min_value=15, max_value=40))
def test_property_residual_and_orthonormality(xi, dim):
    h = build_single(150.0, e_j(150.0, xi), dim)
    s = diagonalize(h)
    v = s.eigenvectors
    np.testing.assert_allclose(v.T @ v, np.eye(dim), atol=1e-12)
    scale = np.linalg.norm(h.matrix, 2)
    assert np.max(np.linalg.norm(h.matrix @ v - v * s.eigenvalues, axis=0)) <= 1e-9 * scale
