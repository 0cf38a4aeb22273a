"""Quantum Michelson model: beam splitters, field operators, detection and g1.

Delay convention
----------------
Field operators carry the positive-frequency time dependence
``E+(t) = sum_k s_k exp(-i w_k t) a_k``.  The delay ``tau`` is applied to the
conjugated (creation) field, ``G1(t, tau) = Tr[rho E-(t + tau) E+(t)]``, the
same placement as the classical ``<E(t) E*(t + tau)>``.  With it the
normalised coherence of a Gaussian wavepacket is
``exp(-sigma^2 tau^2 / 2) exp(+i w0 tau)``, identical to the classical form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from qoct.density import DensityOperator, expectation, mode_occupations, pure_density
from qoct.errors import BasisMismatchError, PreconditionError
from qoct.fock import (
    LinearOperator,
    ModeBasis,
    StateVector,
    annihilation_op,
    make_basis,
    mode_sum_annihilation,
)
from qoct.spectra import FrequencyGrid

_TAU_BLOCK = 256


@dataclass(frozen=True)
class BeamSplitterConvention:
    """Lossless 50:50 splitter with relative phase ``mu`` and global phase ``delta``.

    b3 = e^{i delta} (a1 + e^{i mu} a2) / sqrt(2)
    b4 = e^{i delta} (a2 - e^{-i mu} a1) / sqrt(2)

    The default (mu = pi/2, delta = 0) is the symmetric splitter with a
    factor i on reflection: b3 = (a1 + i a2)/sqrt(2), b4 = (i a1 + a2)/sqrt(2).
    ``delta`` never changes an observable.
    """

    mu: float = math.pi / 2
    delta: float = 0.0

    @property
    def matrix(self) -> np.ndarray:
        """2x2 mixing matrix U with (b3, b4) = U (a1, a2)."""
        g = np.exp(1j * self.delta) / math.sqrt(2)
        return g * np.array(
            [[1.0, np.exp(1j * self.mu)], [-np.exp(-1j * self.mu), 1.0]], dtype=complex
        )

    def unitarity_error(self) -> float:
        u = self.matrix
        return float(np.max(np.abs(u.conj().T @ u - np.eye(2))))


SYMMETRIC = BeamSplitterConvention()


def _require_two_modes(basis: ModeBasis) -> None:
    if basis.mode_count != 2:
        raise PreconditionError(f"need a 2-mode basis, got {basis.mode_count} mode(s)")


def beam_splitter_ops(
    convention: BeamSplitterConvention, basis: ModeBasis
) -> tuple[LinearOperator, LinearOperator]:
    """Output annihilation operators (b3, b4) on a two-mode input basis."""
    _require_two_modes(basis)
    u = convention.matrix
    b3 = mode_sum_annihilation(basis, u[0])
    b4 = mode_sum_annihilation(basis, u[1])
    return b3, b4


def apply_beam_splitter(state: StateVector, convention: BeamSplitterConvention = SYMMETRIC) -> StateVector:
    """Schrodinger-picture action on a two-mode state.

    Input creation operators are rewritten in output modes,
    a_j^+ = sum_i U[i, j] b_i^+, and each |n1, n2> expanded binomially.
    Output occupations are labelled (n3, n4) on the same basis; amplitudes
    that would exceed the basis truncation raise instead of being dropped.
    """
    basis = state.basis
    _require_two_modes(basis)
    u = convention.matrix
    out = np.zeros(basis.dimension, dtype=complex)
    for idx in np.flatnonzero(state.amplitudes):
        n1, n2 = basis.label(idx)
        c = state.amplitudes[idx] / math.sqrt(math.factorial(n1) * math.factorial(n2))
        for p in range(n1 + 1):
            for q in range(n2 + 1):
                m = p + q
                l = n1 + n2 - m
                coeff = (
                    math.comb(n1, p)
                    * math.comb(n2, q)
                    * u[0, 0] ** p
                    * u[1, 0] ** (n1 - p)
                    * u[0, 1] ** q
                    * u[1, 1] ** (n2 - q)
                )
                try:
                    j = basis.index((m, l))
                except PreconditionError:
                    raise PreconditionError(
                        f"output occupation ({m}, {l}) exceeds the basis truncation"
                    ) from None
                out[j] += c * coeff * math.sqrt(math.factorial(m) * math.factorial(l))
    return StateVector(basis, out)


@dataclass(frozen=True)
class FieldOperatorPair:
    """Positive-frequency field E+ and its adjoint E- (photon absorption / emission)."""

    e_plus: LinearOperator
    e_minus: LinearOperator
    scale: complex = 1.0

    @classmethod
    def from_plus(cls, e_plus: LinearOperator, scale: complex = 1.0) -> "FieldOperatorPair":
        return cls(e_plus, e_plus.adjoint(), scale)

    @property
    def basis(self) -> ModeBasis:
        return self.e_plus.basis

    def total(self) -> LinearOperator:
        """E = E+ + E-, Hermitian by construction."""
        return self.e_plus + self.e_minus

    def intensity_op(self) -> LinearOperator:
        return self.e_minus @ self.e_plus

    def __add__(self, other: "FieldOperatorPair") -> "FieldOperatorPair":
        return FieldOperatorPair.from_plus(self.e_plus + other.e_plus, scale=1.0)


def field_op_plus(basis: ModeBasis, mode: int, K: complex = 1.0) -> FieldOperatorPair:
    """E+(r_j) = K a_j."""
    return FieldOperatorPair.from_plus(K * annihilation_op(basis, mode), scale=K)


def field_op_modes(basis: ModeBasis, coefficients: Sequence[complex]) -> FieldOperatorPair:
    """E+ = sum_k coefficients[k] a_k."""
    return FieldOperatorPair.from_plus(mode_sum_annihilation(basis, coefficients))


def detection_rate(rho: DensityOperator, fields: FieldOperatorPair) -> float:
    """Absorbing-detector rate Tr[rho E- E+]."""
    if not rho.basis.same_as(fields.basis):
        raise BasisMismatchError("field operators and density operator live on different bases")
    if rho.ensemble is not None:
        # sum_i P_i <i|E- E+|i> = sum_i P_i ||E+ |i>||^2
        return math.fsum(
            p * float(np.linalg.norm(fields.e_plus.matrix @ psi.amplitudes)) ** 2
            for p, psi in rho.ensemble
        )
    value = expectation(rho, fields.intensity_op())
    if abs(value.imag) > 1e-10 * max(1.0, abs(value.real)):
        raise PreconditionError(f"detection rate has imaginary part {value.imag!r}")
    return value.real


@lru_cache(maxsize=None)
def _one_photon_two_path() -> tuple[DensityOperator, LinearOperator, LinearOperator]:
    basis = make_basis(2, 1, [1.0, 1.0])
    amps = np.zeros(basis.dimension, dtype=complex)
    amps[basis.index((1, 0))] = amps[basis.index((0, 1))] = 1 / math.sqrt(2)
    rho = pure_density(StateVector(basis, amps))
    return rho, annihilation_op(basis, 0), annihilation_op(basis, 1)


def michelson_single_photon_G1(k, delta_l, D: float = 1.0, method: str = "closed"):
    """Detector correlation of one photon split evenly over two arms.

    ``method="closed"`` evaluates D (1 + cos(k dl)).  ``method="operator"``
    builds (|1,0> + |0,1>)/sqrt(2), gives each arm its propagation phase
    e^{ikr} in E+ and evaluates Tr[rho E- E+]; with unit field constants this
    equals 1 + cos(k dl), so the result is scaled by D.
    """
    if np.any(np.asarray(k) <= 0):
        raise PreconditionError("wavenumber must be positive")
    if method == "closed":
        return D * (1.0 + np.cos(np.asarray(k) * np.asarray(delta_l)))
    if method != "operator":
        raise ValueError(f"unknown method {method!r}")
    rho, a1, a2 = _one_photon_two_path()
    ks, dls = np.broadcast_arrays(np.asarray(k, dtype=float), np.asarray(delta_l, dtype=float))
    out = np.empty(ks.shape)
    for i in np.ndindex(ks.shape):
        e_plus = np.exp(1j * ks[i] * dls[i]) * a1 + a2
        out[i] = D * detection_rate(rho, FieldOperatorPair.from_plus(e_plus))
    return out[()] if out.ndim == 0 else out


def _grid_scales(grid: FrequencyGrid, scales) -> np.ndarray:
    if scales is None:
        return np.ones(len(grid))
    s = np.asarray(scales, dtype=complex).reshape(-1)
    if s.size != len(grid):
        raise BasisMismatchError(f"expected {len(grid)} per-mode field scales, got {s.size}")
    return s


def _check_grid(rho: DensityOperator, grid: FrequencyGrid) -> None:
    if rho.basis.mode_count != len(grid):
        raise BasisMismatchError(
            f"density operator has {rho.basis.mode_count} modes but the grid has {len(grid)} bins"
        )


def time_field(basis: ModeBasis, grid: FrequencyGrid, t: float, scales=None) -> FieldOperatorPair:
    """E+(t) = sum_k s_k exp(-i w_k t) a_k; the vacuum-field prefactors live in ``scales``."""
    s = _grid_scales(grid, scales)
    return field_op_modes(basis, s * np.exp(-1j * grid.omegas * t))


def quantum_G1(rho: DensityOperator, grid: FrequencyGrid, t: float, tau, scales=None):
    """Tr[rho E-(t + tau) E+(t)] by explicit operator application."""
    _check_grid(rho, grid)
    taus = np.atleast_1d(np.asarray(tau, dtype=float))
    later = time_field(rho.basis, grid, t, scales)
    out = np.empty(taus.shape, dtype=complex)
    for i, dt in enumerate(taus):
        earlier = time_field(rho.basis, grid, t + dt, scales)
        if rho.ensemble is not None:
            terms = [
                p * np.vdot(earlier.e_plus.matrix @ psi.amplitudes, later.e_plus.matrix @ psi.amplitudes)
                for p, psi in rho.ensemble
            ]
            out[i] = complex(math.fsum(z.real for z in terms), math.fsum(z.imag for z in terms))
        else:
            out[i] = expectation(rho, earlier.e_minus @ later.e_plus)
    return out[0] if np.ndim(tau) == 0 else out


def _phase_sum(weights: np.ndarray, detuning: np.ndarray, taus: np.ndarray) -> np.ndarray:
    out = np.empty(taus.shape, dtype=complex)
    for start in range(0, taus.size, _TAU_BLOCK):
        block = taus[start : start + _TAU_BLOCK]
        phases = np.exp(1j * np.outer(block, detuning))
        # row-wise numpy sums are pairwise, so each tau is independent of its neighbours
        out[start : start + _TAU_BLOCK] = np.sum(weights * phases, axis=1)
    return out


def quantum_g1(rho: DensityOperator, grid: FrequencyGrid, tau, scales=None):
    """Time-integrated, normalised first-order coherence.

    Integrating G1(t, tau) over all t removes the cross-frequency terms, leaving
    g(tau) = sum_k |s_k|^2 <n_k> e^{i w_k tau} / sum_k |s_k|^2 <n_k>,
    where <n_k> = Tr[rho n_k].
    """
    _check_grid(rho, grid)
    s = _grid_scales(grid, scales)
    weights = np.abs(s) ** 2 * mode_occupations(rho)
    taus = np.atleast_1d(np.asarray(tau, dtype=float))
    # factor the carrier out so the summed phases stay small
    centre = float(np.sum(weights * grid.omegas) / np.sum(weights))
    detuning = grid.omegas - centre
    numerator = _phase_sum(weights, detuning, taus)
    norm = _phase_sum(weights, detuning, np.zeros(1))[0].real
    g = numerator / norm * np.exp(1j * centre * taus)
    return g[0] if np.ndim(tau) == 0 else g


def two_path_fringe(rho: DensityOperator, phases) -> np.ndarray:
    """Detector trace Tr[rho E- E+] with E+ = a1 + e^{i phi} a2 swept over ``phases``."""
    _require_two_modes(rho.basis)
    a1 = annihilation_op(rho.basis, 0)
    a2 = annihilation_op(rho.basis, 1)
    return np.array(
        [detection_rate(rho, FieldOperatorPair.from_plus(a1 + np.exp(1j * phi) * a2)) for phi in np.atleast_1d(phases)]
    )


def visibility(samples) -> float:
    """(I_max - I_min) / (I_max + I_min) of a real fringe trace.

    Complex input is read as g1 samples of a balanced two-beam interferometer,
    whose fringe visibility is |g1|; the largest modulus is returned.
    """
    values = np.asarray(samples)
    if np.iscomplexobj(values):
        return min(1.0, float(np.max(np.abs(values))))
    values = values.astype(float).reshape(-1)
    if values.size < 2:
        raise PreconditionError("visibility needs at least two fringe samples")
    hi, lo = float(values.max()), float(values.min())
    if hi + lo == 0:
        raise PreconditionError("flat zero fringe: visibility undefined")
    return min(1.0, max(0.0, (hi - lo) / (hi + lo)))
