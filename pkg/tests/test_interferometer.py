import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_density, random_state_amplitudes
from qoct.classical import gaussian_g1
from qoct.density import (
    DensityOperator,
    OnePhotonPathState,
    degree_of_indistinguishability,
    mixture,
    one_photon_density,
    pure_density,
)
from qoct.errors import BasisMismatchError, PreconditionError
from qoct.fock import StateVector, annihilation_op, fock_state, make_basis, number_op
from qoct.interferometer import (
    SYMMETRIC,
    BeamSplitterConvention,
    apply_beam_splitter,
    beam_splitter_ops,
    detection_rate,
    field_op_plus,
    michelson_single_photon_G1,
    quantum_G1,
    quantum_g1,
    two_path_fringe,
    visibility,
)
from qoct.spectra import SpectralProfile, make_grid, single_bin_grid, wavepacket_coefficients, wavepacket_state


@pytest.mark.parametrize("mu", [0.0, math.pi / 2, 1.234, -2.0])
@pytest.mark.parametrize("delta", [0.0, 0.7])
def test_mixing_matrix_is_unitary(mu, delta):
    assert BeamSplitterConvention(mu, delta).unitarity_error() < 1e-12


def test_symmetric_convention_matrix():
    u = SYMMETRIC.matrix
    expected = np.array([[1, 1j], [1j, 1]]) / math.sqrt(2)
    assert np.allclose(u, expected, atol=1e-15)


def test_output_operators_commute_like_modes():
    b = make_basis(2, 3, [1.0, 1.0])
    b3, b4 = beam_splitter_ops(SYMMETRIC, b)
    # [b3, b4^+] = 0 and [b3, b3^+] = 1 away from the truncation edge
    low = b.total_occupation <= 2
    c34 = (b3 @ b4.adjoint() - b4.adjoint() @ b3).dense()
    c33 = (b3 @ b3.adjoint() - b3.adjoint() @ b3).dense()
    assert np.max(np.abs(c34[np.ix_(low, low)])) < 1e-12
    assert np.max(np.abs(c33[np.ix_(low, low)] - np.eye(low.sum()))) < 1e-12


def test_heisenberg_number_conservation(rng):
    b = make_basis(2, 3, [1.0, 1.0])
    b3, b4 = beam_splitter_ops(BeamSplitterConvention(0.4, 0.1), b)
    n_out = b3.adjoint() @ b3 + b4.adjoint() @ b4
    n_in = number_op(b, 0) + number_op(b, 1)
    assert np.max(np.abs((n_out - n_in).dense())) < 1e-12


def test_hong_ou_mandel_bunching():
    b = make_basis(2, 2, [1.0, 1.0])
    out = apply_beam_splitter(fock_state(b, (1, 1)))
    assert abs(out.amplitude((1, 1))) < 1e-15
    assert abs(out.amplitude((2, 0))) ** 2 == pytest.approx(0.5, abs=1e-15)
    assert abs(out.amplitude((0, 2))) ** 2 == pytest.approx(0.5, abs=1e-15)


def test_schrodinger_matches_heisenberg(rng):
    # <psi_out| n3 |psi_out> must equal <psi_in| b3^+ b3 |psi_in>
    b = make_basis(2, 3, [1.0, 1.0])
    conv = BeamSplitterConvention(1.1, 0.3)
    b3, _ = beam_splitter_ops(conv, b)
    amps = random_state_amplitudes(rng, b.dimension) * (b.total_occupation <= 3)
    psi = StateVector(b, amps).normalized()
    out = apply_beam_splitter(psi, conv)
    assert out.norm() == pytest.approx(1.0, abs=1e-12)
    assert out.expectation(number_op(b, 0)).real == pytest.approx(psi.expectation(b3.adjoint() @ b3).real, abs=1e-12)


def test_beam_splitter_truncation_guard():
    b = make_basis(2, 2, [1.0, 1.0])
    with pytest.raises(PreconditionError):
        apply_beam_splitter(fock_state(b, (2, 2)))


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), mu=st.floats(-math.pi, math.pi))
def test_number_conservation_property(seed, mu):
    rng = np.random.default_rng(seed)
    b = make_basis(2, 3, [1.0, 1.0])
    amps = random_state_amplitudes(rng, b.dimension) * (b.total_occupation <= 3)
    psi = StateVector(b, amps).normalized()
    out = apply_beam_splitter(psi, BeamSplitterConvention(mu))
    n = number_op(b, 0) + number_op(b, 1)
    assert abs(out.expectation(n) - psi.expectation(n)) < 1e-10


def test_michelson_closed_form_endpoints():
    assert michelson_single_photon_G1(1.0, 0.0, D=2.5) == pytest.approx(5.0, abs=1e-12)
    assert michelson_single_photon_G1(1.0, math.pi, D=2.5) == pytest.approx(0.0, abs=1e-12)


def test_michelson_operator_matches_closed_form(rng):
    k = rng.uniform(1e6, 1e7, 50)
    dl = rng.uniform(-1e-5, 1e-5, 50)
    op = michelson_single_photon_G1(k, dl, D=0.8, method="operator")
    assert np.max(np.abs(op - 0.8 * (1 + np.cos(k * dl)))) < 1e-12
    with pytest.raises(PreconditionError):
        michelson_single_photon_G1(-1.0, 0.0)


def test_detection_rate_vacuum_and_fock():
    b = make_basis(2, 2, [1.0, 1.0])
    f = field_op_plus(b, 0, K=2.0)
    assert detection_rate(pure_density(fock_state(b, (0, 0))), f) == 0.0
    assert detection_rate(pure_density(fock_state(b, (2, 0))), f) == pytest.approx(8.0)


def test_quantum_G1_matches_amplitude_oracle():
    p = SpectralProfile(omega0=1.0, sigma=0.1)
    grid = make_grid(p, 48, 5.0)
    rho = pure_density(wavepacket_state(p, grid))
    c = wavepacket_coefficients(p, grid)
    c = c / np.linalg.norm(c)
    amp = lambda t: np.sum(c * np.exp(-1j * grid.omegas * t))  # noqa: E731
    t = 0.4
    taus = np.linspace(-20, 20, 9)
    oracle = np.array([np.conj(amp(t + tau)) * amp(t) for tau in taus])
    assert np.max(np.abs(quantum_G1(rho, grid, t, taus) - oracle)) < 1e-13
    dense = DensityOperator(rho.basis, rho.matrix)
    assert np.max(np.abs(quantum_G1(dense, grid, t, taus) - oracle)) < 1e-13


def test_quantum_g1_gaussian_limit_small():
    p = SpectralProfile(omega0=1.0, sigma=0.05)
    grid = make_grid(p, 1024)
    rho = pure_density(wavepacket_state(p, grid))
    tau = np.linspace(-5 / p.sigma, 5 / p.sigma, 201)
    g = quantum_g1(rho, grid, tau)
    assert np.max(np.abs(g - gaussian_g1(tau, p.omega0, p.sigma))) < 1e-6
    assert quantum_g1(rho, grid, 0.0) == pytest.approx(1.0, abs=1e-15)
    # Hermitian symmetry g(-tau) = g(tau)*
    assert np.max(np.abs(g[::-1] - np.conj(g))) < 1e-12


def test_single_bin_is_monochromatic():
    p = SpectralProfile(omega0=3.0, sigma=0.1)
    grid = single_bin_grid(p)
    rho = pure_density(wavepacket_state(p, grid))
    tau = np.linspace(-50, 50, 11)
    assert np.allclose(quantum_g1(rho, grid, tau), np.exp(3j * tau), atol=1e-13)


def test_g1_grid_mismatch():
    p = SpectralProfile(omega0=1.0, sigma=0.1)
    rho = pure_density(wavepacket_state(p, make_grid(p, 32)))
    with pytest.raises(BasisMismatchError):
        quantum_g1(rho, make_grid(p, 16), 0.0)


@pytest.mark.parametrize("p_q", [0.0, 0.25, 0.5, 0.9, 1.0])
def test_visibility_equals_p_q(p_q):
    path = OnePhotonPathState.balanced(0.3)
    rho = mixture([(p_q, one_photon_density(path)), (1 - p_q, one_photon_density(path, quantum=False))])
    # rate = 1 + 2 Re(e^{i phi} rho21); the sweep hits its extrema at phi = -0.3 and pi - 0.3
    fringe = two_path_fringe(rho, -0.3 + np.linspace(0, 2 * math.pi, 720, endpoint=False))
    assert visibility(fringe) == pytest.approx(degree_of_indistinguishability(rho).p_q, abs=1e-9)


def test_visibility_edge_cases():
    assert visibility([1.0, 1.0, 1.0]) == 0.0
    assert visibility([0.0, 2.0]) == 1.0
    assert visibility(np.array([0.3 + 0.4j, 0.1])) == pytest.approx(0.5)
    with pytest.raises(PreconditionError):
        visibility([0.0, 0.0])


def test_single_photon_splits_evenly():
    b = make_basis(2, 1, [1.0, 1.0])
    out = apply_beam_splitter(fock_state(b, (1, 0)))
    assert out.amplitude((1, 0)) == pytest.approx(1 / math.sqrt(2), abs=1e-15)
    assert out.amplitude((0, 1)) == pytest.approx(1j / math.sqrt(2), abs=1e-15)


def test_total_field_is_hermitian_and_vacuum_dark():
    b = make_basis(2, 2, [1.0, 1.0])
    f = field_op_plus(b, 0, K=0.3 + 0.2j) + field_op_plus(b, 1)
    assert f.total().is_hermitian()
    assert detection_rate(pure_density(fock_state(b, (0, 0))), f) == 0.0
    assert detection_rate(pure_density(fock_state(b, (0, 1))), field_op_plus(b, 1)) == pytest.approx(1.0)


def test_two_arm_fields_in_phase_give_full_fringe():
    rho = one_photon_density(OnePhotonPathState.balanced())
    f = field_op_plus(rho.basis, 0) + field_op_plus(rho.basis, 1)
    assert detection_rate(rho, f) == pytest.approx(2.0, abs=1e-15)


def test_single_bin_G1_has_constant_modulus():
    p = SpectralProfile(omega0=3.0, sigma=0.1)
    grid = single_bin_grid(p)
    rho = pure_density(wavepacket_state(p, grid))
    G = quantum_G1(rho, grid, 0.0, np.linspace(-1e3, 1e3, 7))
    assert np.allclose(np.abs(G), np.abs(G[0]), rtol=1e-13)


def test_g1_at_coherence_time_and_phase():
    p = SpectralProfile(omega0=1.0, sigma=0.05)
    grid = make_grid(p, 4096)
    rho = pure_density(wavepacket_state(p, grid))
    g = quantum_g1(rho, grid, 1 / p.sigma)
    assert abs(g) == pytest.approx(math.exp(-0.5), abs=1e-8)
    assert np.angle(g) == pytest.approx(np.angle(np.exp(1j * p.omega0 / p.sigma)), abs=1e-8)


def test_classical_mixture_has_no_fringe():
    rho = one_photon_density(OnePhotonPathState.balanced(), quantum=False)
    assert visibility(two_path_fringe(rho, np.linspace(0, 2 * math.pi, 64))) == pytest.approx(0.0, abs=1e-15)
