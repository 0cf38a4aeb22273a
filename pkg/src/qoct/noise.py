"""Quantum-noise models: SQL, vacuum-port momentum difference, Kerr detector ports, photon counts."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from qoct.density import DensityOperator, expectation, pure_density
from qoct.errors import PreconditionError, UnitSystemError
from qoct.fock import LinearOperator, ModeBasis, diagonal_op, fock_state, make_basis, annihilation_op
from qoct.interferometer import BeamSplitterConvention, apply_beam_splitter, beam_splitter_ops
from qoct.units import SI, Units

DISTRIBUTIONS = ("poisson", "bose_einstein")
# samples drawn per independently seeded RNG block
COUNT_BLOCK = 1 << 16


@dataclass(frozen=True)
class SqlQuery:
    mass: float
    duration: float

    def __post_init__(self):
        if not self.mass > 0 or not self.duration > 0:
            raise PreconditionError("mass and duration must be positive")


def sql_displacement(query: SqlQuery, units: Units = SI) -> float:
    """(2 hbar tau / m)^(1/2) in metres."""
    if not units.is_si:
        raise UnitSystemError("the standard quantum limit is dimensional; use SI units")
    return math.sqrt(2.0 * units.hbar * query.duration / query.mass)


def _require_two_modes(basis: ModeBasis) -> None:
    if basis.mode_count != 2:
        raise PreconditionError(f"need a 2-mode basis, got {basis.mode_count} mode(s)")


def momentum_prefactor(bounces: int, omega: float, units: Units = SI) -> float:
    return 2.0 * bounces * units.hbar * omega / units.c


def momentum_diff_operator(
    bounces: int, omega: float, mu: float, basis: ModeBasis, units: Units = SI
) -> LinearOperator:
    """Arm momentum-transfer difference (2 B hbar w / c)(b4^+ b4 - b3^+ b3).

    Built from the splitter outputs and, independently, from the input-mode
    form -(2 B hbar w / c)(e^{i mu} a1^+ a2 + e^{-i mu} a2^+ a1); the two must
    agree entrywise to 1e-12 of the prefactor.
    """
    _require_two_modes(basis)
    if int(bounces) != bounces or bounces < 1:
        raise PreconditionError(f"bounce count must be a positive integer, got {bounces!r}")
    if not omega > 0:
        raise PreconditionError("omega must be positive")
    scale = momentum_prefactor(bounces, omega, units)
    b3, b4 = beam_splitter_ops(BeamSplitterConvention(mu=mu), basis)
    from_outputs = scale * (b4.adjoint() @ b4 - b3.adjoint() @ b3)
    a1, a2 = annihilation_op(basis, 0), annihilation_op(basis, 1)
    from_inputs = -scale * (np.exp(1j * mu) * (a1.adjoint() @ a2) + np.exp(-1j * mu) * (a2.adjoint() @ a1))
    mismatch = abs(from_outputs.matrix - from_inputs.matrix)
    if mismatch.nnz and mismatch.max() > 1e-12 * scale:
        raise ArithmeticError(
            f"output- and input-mode momentum operators differ by {mismatch.max() / scale:.3e} (relative)"
        )
    return from_inputs


@dataclass(frozen=True)
class KerrInterferometerParams:
    """Arm lengths and Kerr phase-per-photon coefficients of the return trip.

    ``C2`` defaults to ``C1`` (the symmetric-mirror approximation).
    """

    k: float
    Z1: float = 0.0
    Z2: float = 0.0
    C1: float = 0.0
    C2: float | None = None

    def __post_init__(self):
        if not self.k > 0:
            raise PreconditionError("wavenumber must be positive")
        if self.Z1 < 0 or self.Z2 < 0:
            raise PreconditionError("arm lengths must be non-negative")
        if self.C2 is None:
            object.__setattr__(self, "C2", self.C1)


def _kerr_arm(basis: ModeBasis, mode: int, kz: float, C: float) -> LinearOperator:
    # exp(ikZ + iC n) is diagonal in the Fock basis, so its exponential is exact
    n = basis.occupations[:, mode].astype(float)
    return diagonal_op(basis, np.exp(1j * (kz + C * n))) @ annihilation_op(basis, mode)


def kerr_output_ops(params: KerrInterferometerParams, basis: ModeBasis) -> tuple[LinearOperator, LinearOperator]:
    """Return-trip port operators (d, e) = (arm1 +/- arm2) / sqrt(2)."""
    _require_two_modes(basis)
    arm1 = _kerr_arm(basis, 0, params.k * params.Z1, params.C1)
    arm2 = _kerr_arm(basis, 1, params.k * params.Z2, params.C2)
    s = 1 / math.sqrt(2)
    return s * (arm1 + arm2), s * (arm1 - arm2)


def kerr_interference_form(params: KerrInterferometerParams, basis: ModeBasis) -> LinearOperator:
    """d^+ d written as (1/2)(n1 + n2 + {b1^+ exp[ik(Z2 - Z1) + iC(n2 - n1)] b2 + h.c.}), C1 = C2 = C."""
    _require_two_modes(basis)
    if params.C1 != params.C2:
        raise PreconditionError("the closed interference form assumes C1 == C2")
    n1 = basis.occupations[:, 0].astype(float)
    n2 = basis.occupations[:, 1].astype(float)
    b1, b2 = annihilation_op(basis, 0), annihilation_op(basis, 1)
    phase = diagonal_op(basis, np.exp(1j * (params.k * (params.Z2 - params.Z1) + params.C1 * (n2 - n1))))
    cross = b1.adjoint() @ phase @ b2
    return 0.5 * (diagonal_op(basis, n1 + n2) + cross + cross.adjoint())


@dataclass(frozen=True)
class PortStatistics:
    mean_d: float
    mean_e: float
    var_d: float
    var_e: float
    var_difference: float

    @property
    def var_sum(self) -> float:
        return self.var_d + self.var_e


def _moments(rho: DensityOperator, op: LinearOperator) -> tuple[float, float]:
    mean = expectation(rho, op).real
    second = expectation(rho, op @ op).real
    return mean, second - mean * mean


def detector_counts_and_variance(
    rho_in: DensityOperator, params: KerrInterferometerParams, basis: ModeBasis | None = None
) -> PortStatistics:
    """Photon-number means and variances at both return ports.

    Vacuum and photon-counting contributions are not separable here, so only
    the combined variances and the difference channel Var(d^+d - e^+e) are given.
    """
    basis = rho_in.basis if basis is None else basis
    if not rho_in.basis.same_as(basis):
        raise PreconditionError("density operator does not live on the given basis")
    d, e = kerr_output_ops(params, basis)
    nd = d.adjoint() @ d
    ne = e.adjoint() @ e
    mean_d, var_d = _moments(rho_in, nd)
    mean_e, var_e = _moments(rho_in, ne)
    _, var_diff = _moments(rho_in, nd - ne)
    return PortStatistics(mean_d, mean_e, var_d, var_e, var_diff)


def split_photon_density(photons: int, relative_phase: float = 0.0) -> DensityOperator:
    """|photons, 0> divided by a 50:50 splitter into the two arms.

    The splitter is chosen so arm 2 lags arm 1 by ``relative_phase``; for one
    photon this is (|1,0> + e^{i phase}|0,1>)/sqrt(2).
    """
    if int(photons) != photons or photons < 1:
        raise PreconditionError("photon number must be a positive integer")
    basis = make_basis(2, int(photons), [1.0, 1.0])
    # U[1,0] / U[0,0] = -exp(-i mu) = exp(i phase)
    convention = BeamSplitterConvention(mu=math.pi - relative_phase)
    psi = apply_beam_splitter(fock_state(basis, (int(photons), 0)), convention)
    return pure_density(psi)


@dataclass(frozen=True)
class CountSample:
    distribution: str
    mean: float
    counts: np.ndarray
    seed: int

    @property
    def sample_mean(self) -> float:
        return float(np.mean(self.counts))

    @property
    def sample_variance(self) -> float:
        return float(np.var(self.counts, ddof=1))

    @property
    def theoretical_variance(self) -> float:
        return count_variance(self.distribution, self.mean)

    def summary(self) -> dict:
        return {
            "distribution": self.distribution,
            "mean": self.mean,
            "samples": int(self.counts.size),
            "seed": self.seed,
            "sample_mean": self.sample_mean,
            "sample_variance": self.sample_variance,
            "theoretical_variance": self.theoretical_variance,
            "fano_factor": self.sample_variance / self.sample_mean if self.sample_mean else math.nan,
        }


def _check_distribution(distribution: str) -> None:
    if distribution not in DISTRIBUTIONS:
        raise PreconditionError(f"distribution must be one of {DISTRIBUTIONS}, got {distribution!r}")


def count_variance(distribution: str, mean: float) -> float:
    _check_distribution(distribution)
    return mean if distribution == "poisson" else mean + mean * mean


def count_pmf(distribution: str, mean: float, n):
    """Poisson e^{-m} m^n / n!  or Bose-Einstein m^n / (1 + m)^(n + 1)."""
    _check_distribution(distribution)
    if distribution == "poisson":
        return stats.poisson.pmf(n, mean)
    return stats.geom.pmf(n, 1.0 / (1.0 + mean), loc=-1)


def _draw_block(distribution: str, mean: float, seed: int, block: int, size: int) -> np.ndarray:
    ss = np.random.SeedSequence(seed, spawn_key=(block,))
    rng = np.random.Generator(np.random.Philox(ss))
    if distribution == "poisson":
        return rng.poisson(mean, size)
    # numpy's geometric counts trials to first success (>= 1)
    return rng.geometric(1.0 / (1.0 + mean), size) - 1


def sample_counts(
    distribution: str, mean: float, n_samples: int, seed: int, workers: int = 1
) -> CountSample:
    """Photon counts per interval, reproducible for a given seed.

    The stream is cut into fixed blocks of ``COUNT_BLOCK`` samples, each with
    its own counter-based generator keyed by (seed, block index), so any
    number of ``workers`` yields the same array.
    """
    _check_distribution(distribution)
    if not mean > 0:
        raise PreconditionError("mean photon number must be positive")
    if int(n_samples) != n_samples or n_samples < 1:
        raise PreconditionError("n_samples must be a positive integer")
    n_samples = int(n_samples)
    sizes = [min(COUNT_BLOCK, n_samples - start) for start in range(0, n_samples, COUNT_BLOCK)]
    jobs = [(distribution, mean, seed, b, size) for b, size in enumerate(sizes)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda job: _draw_block(*job), jobs))
    else:
        parts = [_draw_block(*job) for job in jobs]
    counts = np.concatenate(parts).astype(np.int64)
    return CountSample(distribution, float(mean), counts, int(seed))


def chi_square_gof(sample: CountSample, min_expected: float = 5.0) -> tuple[float, float]:
    """Pearson chi-square of sampled counts against the analytic PMF.

    Bins are single count values, merged left to right until each holds at
    least ``min_expected`` expected events; the last bin absorbs the tail.
    """
    counts = sample.counts
    n = counts.size
    top = int(counts.max())
    observed_all = np.bincount(counts, minlength=top + 1).astype(float)
    expected_all = n * count_pmf(sample.distribution, sample.mean, np.arange(top + 1))
    expected_all[-1] += n * (1.0 - float(np.sum(count_pmf(sample.distribution, sample.mean, np.arange(top + 1)))))
    obs, exp = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(observed_all, expected_all):
        acc_o += o
        acc_e += e
        if acc_e >= min_expected:
            obs.append(acc_o)
            exp.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 or acc_o > 0:
        if obs:
            obs[-1] += acc_o
            exp[-1] += acc_e
        else:
            obs.append(acc_o)
            exp.append(acc_e)
    if len(obs) < 2:
        raise PreconditionError("too few populated bins for a chi-square test")
    exp = np.asarray(exp)
    exp *= n / exp.sum()
    result = stats.chisquare(obs, exp)
    return float(result.statistic), float(result.pvalue)
