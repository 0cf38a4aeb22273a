"""Density operators, trace expectations and single-photon path indistinguishability."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from qoct.errors import (
    BasisMismatchError,
    FormatError,
    NormalizationError,
    NotPositiveSemidefiniteError,
    PreconditionError,
    SinglePathError,
)
from qoct.fock import LinearOperator, ModeBasis, StateVector, fock_state, make_basis

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_FLOOR = -1e-10
# largest dimension for which an ensemble is expanded into a dense matrix
DENSE_LIMIT = 8192


def two_path_basis(cutoff: int = 1) -> ModeBasis:
    return make_basis(2, cutoff, [1.0, 1.0])


def one_photon_sector_basis() -> ModeBasis:
    """Two modes restricted to total occupation <= 1: |0,0>, |0,1>, |1,0>."""
    return make_basis(2, 1, [1.0, 1.0], max_total=1)


class DensityOperator:
    """Hermitian, unit-trace, positive semidefinite operator on a ModeBasis.

    Either a dense ``matrix`` or an ``ensemble`` of ``(probability, state)``
    pairs is given.  The ensemble form keeps large pure states (thousands of
    frequency bins) cheap; :attr:`matrix` expands it on demand.
    """

    __slots__ = ("basis", "_matrix", "_ensemble")

    def __init__(
        self,
        basis: ModeBasis,
        matrix: np.ndarray | None = None,
        *,
        ensemble: Iterable[tuple[float, StateVector]] | None = None,
    ):
        if (matrix is None) == (ensemble is None):
            raise PreconditionError("give exactly one of matrix or ensemble")
        self.basis = basis
        if matrix is not None:
            m = np.array(matrix, dtype=complex)
            if m.shape != (basis.dimension, basis.dimension):
                raise BasisMismatchError(
                    f"density matrix shape {m.shape} does not match basis dimension {basis.dimension}"
                )
            _validate_dense(m)
            m.flags.writeable = False
            self._matrix = m
            self._ensemble = None
        else:
            members = tuple((float(p), psi) for p, psi in ensemble)
            _validate_probabilities([p for p, _ in members])
            for _, psi in members:
                if not psi.basis.same_as(basis):
                    raise BasisMismatchError("ensemble state lives on a different basis")
                if not psi.is_normalized():
                    raise NormalizationError("ensemble states must be normalized")
            self._matrix = None
            self._ensemble = tuple((p, psi) for p, psi in members if p > 0)

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    @property
    def ensemble(self) -> tuple[tuple[float, StateVector], ...] | None:
        return self._ensemble

    @property
    def matrix(self) -> np.ndarray:
        if self._matrix is not None:
            return self._matrix
        if self.dimension > DENSE_LIMIT:
            raise PreconditionError(
                f"refusing to expand a {self.dimension}-dimensional ensemble into a dense matrix"
            )
        m = np.zeros((self.dimension, self.dimension), dtype=complex)
        for p, psi in self._ensemble:
            m += p * np.outer(psi.amplitudes, psi.amplitudes.conj())
        m.flags.writeable = False
        return m

    def element(self, bra: Sequence[int], ket: Sequence[int]) -> complex:
        i, j = self.basis.index(bra), self.basis.index(ket)
        if self._matrix is not None:
            return complex(self._matrix[i, j])
        return complex(sum(p * psi.amplitudes[i] * np.conj(psi.amplitudes[j]) for p, psi in self._ensemble))

    def trace(self) -> float:
        if self._matrix is not None:
            return float(np.trace(self._matrix).real)
        return float(sum(p * psi.norm() ** 2 for p, psi in self._ensemble))

    def purity(self) -> float:
        m = self.matrix
        return float(np.real(np.vdot(m, m)))

    def __repr__(self) -> str:
        form = "dense" if self._matrix is not None else f"ensemble[{len(self._ensemble)}]"
        return f"DensityOperator({self.basis!r}, {form})"


def mode_occupations(rho: DensityOperator) -> np.ndarray:
    """Tr[rho n_k] for every mode k at once (number operators are diagonal)."""
    if rho.ensemble is None:
        populations = np.real(np.diag(rho.matrix))
    else:
        populations = sum(p * np.abs(psi.amplitudes) ** 2 for p, psi in rho.ensemble)
    return populations @ rho.basis.occupations.astype(float)


def _validate_probabilities(probs: Sequence[float]) -> None:
    if any(p < 0 for p in probs):
        raise PreconditionError("mixture probabilities must be non-negative")
    if abs(math.fsum(probs) - 1.0) > 1e-12:
        raise PreconditionError(f"mixture probabilities sum to {math.fsum(probs)!r}, not 1")


def _validate_dense(m: np.ndarray) -> None:
    if np.max(np.abs(m - m.conj().T), initial=0.0) > HERMITIAN_TOL:
        raise PreconditionError("density matrix is not Hermitian")
    tr = np.trace(m)
    if abs(tr - 1.0) > TRACE_TOL:
        raise PreconditionError(f"density matrix trace is {tr.real!r}, not 1")
    evals = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    if evals.size and evals[0] < PSD_FLOOR:
        raise NotPositiveSemidefiniteError(
            f"density matrix has eigenvalue {evals[0]:.3e} below {PSD_FLOOR:g}"
        )


def pure_density(state: StateVector) -> DensityOperator:
    """|psi><psi| for a normalized state."""
    if not state.is_normalized():
        raise NormalizationError(f"state has squared norm {state.norm() ** 2!r}")
    return DensityOperator(state.basis, ensemble=[(1.0, state)])


def mixture(components: Sequence[tuple[float, DensityOperator]]) -> DensityOperator:
    """Convex combination sum_i p_i rho_i."""
    if not components:
        raise PreconditionError("mixture needs at least one component")
    basis = components[0][1].basis
    for _, rho in components:
        if not rho.basis.same_as(basis):
            raise BasisMismatchError("mixture components live on different bases")
    _validate_probabilities([p for p, _ in components])
    if all(rho.ensemble is not None for _, rho in components):
        return DensityOperator(
            basis,
            ensemble=[(p * q, psi) for p, rho in components for q, psi in rho.ensemble],
        )
    total = sum(p * rho.matrix for p, rho in components)
    return DensityOperator(basis, 0.5 * (total + total.conj().T))


def expectation(rho: DensityOperator, op: LinearOperator) -> complex:
    """Tr[O rho]."""
    if not rho.basis.same_as(op.basis):
        raise BasisMismatchError("operator and density operator live on different bases")
    if rho.ensemble is None:
        # Tr[O rho] = sum_ij O_ij rho_ji
        return complex(op.matrix.multiply(rho.matrix.T).sum())
    terms = [p * np.vdot(psi.amplitudes, op.matrix @ psi.amplitudes) for p, psi in rho.ensemble]
    return complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))


@dataclass(frozen=True)
class OnePhotonPathState:
    """alpha|1,0> + beta|0,1>: one photon shared between two paths."""

    alpha: complex
    beta: complex

    def __post_init__(self):
        norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise NormalizationError(f"|alpha|^2 + |beta|^2 = {norm!r}, expected 1")

    @classmethod
    def balanced(cls, phase: float = 0.0) -> "OnePhotonPathState":
        return cls(1 / math.sqrt(2), np.exp(1j * phase) / math.sqrt(2))


def one_photon_density(
    path: OnePhotonPathState, quantum: bool = True, basis: ModeBasis | None = None
) -> DensityOperator:
    """Coherent superposition (``quantum=True``) or which-path mixture."""
    if basis is None:
        basis = two_path_basis()
    if basis.mode_count != 2:
        raise PreconditionError(f"one-photon path states need a 2-mode basis, got {basis.mode_count} modes")
    arm1 = fock_state(basis, (1, 0))
    arm2 = fock_state(basis, (0, 1))
    if quantum:
        psi = StateVector(basis, path.alpha * arm1.amplitudes + path.beta * arm2.amplitudes)
        return pure_density(psi)
    return mixture(
        [(abs(path.alpha) ** 2, pure_density(arm1)), (abs(path.beta) ** 2, pure_density(arm2))]
    )


@dataclass(frozen=True)
class Indistinguishability:
    p_q: float
    alpha_beta_conj: complex
    rho11: float
    rho22: float
    rho12: complex

    @property
    def phase(self) -> float:
        return float(np.angle(self.rho12))


def path_sector(rho) -> np.ndarray:
    """2x2 block of rho on (|1,0>, |0,1>); a raw 2x2 array passes through."""
    if isinstance(rho, DensityOperator):
        if rho.basis.mode_count != 2:
            raise PreconditionError("path sector needs a 2-mode density operator")
        states = [(1, 0), (0, 1)]
        return np.array([[rho.element(a, b) for b in states] for a in states])
    block = np.asarray(rho, dtype=complex)
    if block.shape != (2, 2):
        raise PreconditionError(f"expected a 2x2 path-sector block, got shape {block.shape}")
    return block


def degree_of_indistinguishability(rho) -> Indistinguishability:
    """P_Q = |rho12| / sqrt(rho11 rho22), with alpha beta* recovered from the phase of rho12."""
    block = path_sector(rho)
    rho11, rho22 = float(block[0, 0].real), float(block[1, 1].real)
    rho12 = complex(block[0, 1])
    if rho11 <= 0 or rho22 <= 0:
        raise SinglePathError()
    scale = math.sqrt(rho11 * rho22)
    return Indistinguishability(
        p_q=abs(rho12) / scale,
        alpha_beta_conj=complex(scale * np.exp(1j * np.angle(rho12))),
        rho11=rho11,
        rho22=rho22,
        rho12=rho12,
    )


def sector_density(block: np.ndarray) -> DensityOperator:
    """Embed a 2x2 (|1,0>, |0,1>) block into the one-photon sector basis."""
    block = path_sector(block)
    basis = one_photon_sector_basis()
    idx = [basis.index((1, 0)), basis.index((0, 1))]
    m = np.zeros((basis.dimension, basis.dimension), dtype=complex)
    m[np.ix_(idx, idx)] = block
    return DensityOperator(basis, m)


def density_to_json(rho: DensityOperator) -> dict:
    m = rho.matrix
    return {"dim": int(m.shape[0]), "re": m.real.tolist(), "im": m.imag.tolist()}


def density_from_json(obj) -> DensityOperator:
    """Parse ``{"dim": d, "re": [[...]], "im": [[...]]}``.

    ``dim == 2`` is read as the (|1,0>, |0,1>) path block; ``dim == (N+1)**2``
    as a full two-mode density with per-mode cutoff N.
    """
    if isinstance(obj, (str, bytes)):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON: {exc}") from None
    try:
        dim = obj["dim"]
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed density JSON: {exc}") from None
    if not isinstance(dim, int) or dim < 2 or re.shape != (dim, dim) or im.shape != (dim, dim):
        raise FormatError(f"density JSON must hold two {dim!r}x{dim!r} arrays 're' and 'im'")
    m = re + 1j * im
    if dim == 2:
        return sector_density(m)
    cutoff = math.isqrt(dim) - 1
    if (cutoff + 1) ** 2 != dim:
        raise FormatError(f"dim {dim} is neither 2 nor a two-mode basis size (N+1)^2")
    return DensityOperator(two_path_basis(cutoff), m)
