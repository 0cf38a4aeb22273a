"""Truncated multimode Fock space and its ladder-operator algebra.

Basis elements are occupation tuples ``(n_0, ..., n_{M-1})`` with
``0 <= n_k <= cutoff``, enumerated lexicographically with mode 0 varying
slowest.  An optional ``max_total`` keeps only tuples whose total photon
number does not exceed it; this is how a wavepacket spread over thousands of
frequency bins is represented (its single-photon sector has one basis element
per bin instead of ``2**M``).

Operators are stored as ``scipy.sparse`` CSR arrays.  Ladder operators have
at most one non-zero per column, so the dense form is only materialised on
request (:meth:`LinearOperator.dense`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from qoct.errors import BasisMismatchError, DimensionOverflowError, PreconditionError
from qoct.units import SI, Units

DEFAULT_MAX_DIMENSION = 2**24


def _count_states(mode_count: int, cutoff: int, max_total: int | None) -> int:
    if max_total is None or max_total >= mode_count * cutoff:
        return (cutoff + 1) ** mode_count
    # ways[t] = number of occupation vectors over the modes seen so far with total t
    ways = [1] + [0] * max_total
    for _ in range(mode_count):
        new = [0] * (max_total + 1)
        for t, w in enumerate(ways):
            if w:
                for n in range(min(cutoff, max_total - t) + 1):
                    new[t + n] += w
        ways = new
    return sum(ways)


def _enumerate_capped(mode_count: int, cutoff: int, max_total: int, dtype) -> np.ndarray:
    rows = []
    occ = np.zeros(mode_count, dtype=np.int64)
    while True:
        rows.append(occ.astype(dtype))
        inclusive = np.cumsum(occ)
        can_increment = (occ < cutoff) & (inclusive + 1 <= max_total)
        candidates = np.flatnonzero(can_increment)
        if candidates.size == 0:
            break
        i = candidates[-1]
        occ[i] += 1
        occ[i + 1 :] = 0
    return np.stack(rows)


class ModeBasis:
    """Occupation-number basis for ``mode_count`` bosonic modes.

    Instances are immutable once constructed; all index maps and ladder
    transition tables are built eagerly.
    """

    def __init__(
        self,
        mode_count: int,
        cutoff: int,
        frequencies: Sequence[float],
        *,
        max_total: int | None = None,
        max_dimension: int = DEFAULT_MAX_DIMENSION,
    ):
        if int(mode_count) != mode_count or mode_count < 1:
            raise PreconditionError(f"mode_count must be a positive integer, got {mode_count!r}")
        if int(cutoff) != cutoff or cutoff < 1:
            raise PreconditionError(f"cutoff must be a positive integer, got {cutoff!r}")
        freqs = np.asarray(frequencies, dtype=float).reshape(-1)
        if freqs.size != mode_count:
            raise PreconditionError(
                f"expected {mode_count} mode frequencies, got {freqs.size}"
            )
        if not np.all(np.isfinite(freqs)) or np.any(freqs <= 0):
            raise PreconditionError("mode frequencies must be finite and strictly positive")
        if max_total is not None and (int(max_total) != max_total or max_total < 1):
            raise PreconditionError(f"max_total must be a positive integer, got {max_total!r}")

        dimension = _count_states(int(mode_count), int(cutoff), max_total)
        if dimension > max_dimension:
            raise DimensionOverflowError(
                f"basis dimension {dimension} exceeds the cap of {max_dimension}"
            )

        self.mode_count = int(mode_count)
        self.cutoff = int(cutoff)
        self.max_total = None if max_total is None else int(max_total)
        self.mode_frequencies = freqs
        self.mode_frequencies.flags.writeable = False

        dtype = np.uint8 if cutoff < 256 else np.int32
        if self.max_total is None or self.max_total >= mode_count * cutoff:
            grids = np.indices((self.cutoff + 1,) * self.mode_count, dtype=dtype)
            occupations = grids.reshape(self.mode_count, -1).T.copy()
        else:
            occupations = _enumerate_capped(self.mode_count, self.cutoff, self.max_total, dtype)
        occupations.flags.writeable = False
        self.occupations = occupations
        self.dimension = occupations.shape[0]
        self._index = {row.tobytes(): i for i, row in enumerate(occupations)}

        # (source index, target index, sqrt(n)) for lowering on each mode
        self._lowering = []
        for k in range(self.mode_count):
            src = np.flatnonzero(occupations[:, k])
            lowered = occupations[src].copy()
            lowered[:, k] -= 1
            dst = np.fromiter(
                (self._index[row.tobytes()] for row in lowered), dtype=np.int64, count=src.size
            )
            amp = np.sqrt(occupations[src, k].astype(float))
            self._lowering.append((src, dst, amp))

    @property
    def total_occupation(self) -> np.ndarray:
        return self.occupations.sum(axis=1, dtype=np.int64)

    def index(self, occupation: Sequence[int]) -> int:
        raw = np.asarray(occupation, dtype=np.int64)
        if raw.shape != (self.mode_count,):
            raise PreconditionError(f"occupation must have {self.mode_count} entries")
        if np.any(raw < 0) or np.any(raw > self.cutoff):
            raise PreconditionError(f"occupation {tuple(occupation)} is outside the basis")
        key = raw.astype(self.occupations.dtype)
        try:
            return self._index[key.tobytes()]
        except KeyError:
            raise PreconditionError(f"occupation {tuple(occupation)} is outside the basis") from None

    def label(self, i: int) -> tuple[int, ...]:
        return tuple(int(n) for n in self.occupations[i])

    def check_mode(self, mode: int) -> int:
        if int(mode) != mode or not 0 <= mode < self.mode_count:
            raise PreconditionError(
                f"mode index {mode!r} out of range for {self.mode_count} mode(s)"
            )
        return int(mode)

    def same_as(self, other: "ModeBasis") -> bool:
        if self is other:
            return True
        return (
            self.mode_count == other.mode_count
            and self.cutoff == other.cutoff
            and self.max_total == other.max_total
            and np.array_equal(self.mode_frequencies, other.mode_frequencies)
        )

    def __repr__(self) -> str:
        cap = "" if self.max_total is None else f", max_total={self.max_total}"
        return f"ModeBasis(mode_count={self.mode_count}, cutoff={self.cutoff}{cap}, dimension={self.dimension})"


def make_basis(
    mode_count: int,
    cutoff: int,
    frequencies: Sequence[float],
    *,
    max_total: int | None = None,
    max_dimension: int = DEFAULT_MAX_DIMENSION,
) -> ModeBasis:
    return ModeBasis(
        mode_count, cutoff, frequencies, max_total=max_total, max_dimension=max_dimension
    )


def _require_same(a: ModeBasis, b: ModeBasis) -> None:
    if not a.same_as(b):
        raise BasisMismatchError(f"basis mismatch: {a!r} vs {b!r}")


@dataclass(frozen=True)
class StateVector:
    basis: ModeBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.basis.dimension,):
            raise BasisMismatchError(
                f"amplitude vector has shape {amps.shape}, basis dimension is {self.basis.dimension}"
            )
        object.__setattr__(self, "amplitudes", amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def is_normalized(self, tol: float = 1e-12) -> bool:
        return abs(self.norm() ** 2 - 1.0) <= tol

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n == 0:
            raise PreconditionError("cannot normalize the zero vector")
        return StateVector(self.basis, self.amplitudes / n)

    def inner(self, other: "StateVector") -> complex:
        _require_same(self.basis, other.basis)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def expectation(self, op: "LinearOperator") -> complex:
        _require_same(self.basis, op.basis)
        return complex(np.vdot(self.amplitudes, op.matrix @ self.amplitudes))

    def amplitude(self, occupation: Sequence[int]) -> complex:
        return complex(self.amplitudes[self.basis.index(occupation)])


@dataclass(frozen=True)
class LinearOperator:
    basis: ModeBasis
    matrix: sp.csr_array

    def __post_init__(self):
        m = self.matrix
        m = sp.csr_array(m, dtype=complex) if not sp.issparse(m) else sp.csr_array(m).astype(complex)
        d = self.basis.dimension
        if m.shape != (d, d):
            raise BasisMismatchError(f"operator shape {m.shape} does not match basis dimension {d}")
        object.__setattr__(self, "matrix", m)

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def adjoint(self) -> "LinearOperator":
        return LinearOperator(self.basis, self.matrix.conj().T)

    @property
    def H(self) -> "LinearOperator":
        return self.adjoint()

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        diff = self.matrix - self.matrix.conj().T
        return diff.nnz == 0 or float(abs(diff).max()) <= tol

    def __matmul__(self, other):
        if isinstance(other, LinearOperator):
            _require_same(self.basis, other.basis)
            return LinearOperator(self.basis, self.matrix @ other.matrix)
        if isinstance(other, StateVector):
            _require_same(self.basis, other.basis)
            return StateVector(self.basis, self.matrix @ other.amplitudes)
        return self.matrix @ other

    def __add__(self, other: "LinearOperator") -> "LinearOperator":
        _require_same(self.basis, other.basis)
        return LinearOperator(self.basis, self.matrix + other.matrix)

    def __sub__(self, other: "LinearOperator") -> "LinearOperator":
        _require_same(self.basis, other.basis)
        return LinearOperator(self.basis, self.matrix - other.matrix)

    def __neg__(self) -> "LinearOperator":
        return LinearOperator(self.basis, -self.matrix)

    def __mul__(self, scalar) -> "LinearOperator":
        return LinearOperator(self.basis, self.matrix * complex(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "LinearOperator":
        return LinearOperator(self.basis, self.matrix / complex(scalar))


def identity_op(basis: ModeBasis) -> LinearOperator:
    return LinearOperator(basis, sp.identity(basis.dimension, dtype=complex, format="csr"))


def diagonal_op(basis: ModeBasis, values: np.ndarray) -> LinearOperator:
    return LinearOperator(basis, sp.diags_array(np.asarray(values, dtype=complex), format="csr"))


def mode_sum_annihilation(basis: ModeBasis, coefficients: Sequence[complex]) -> LinearOperator:
    """``sum_k coefficients[k] * a_k`` assembled in a single sparse build."""
    coeffs = np.asarray(coefficients, dtype=complex).reshape(-1)
    if coeffs.size != basis.mode_count:
        raise BasisMismatchError(
            f"expected {basis.mode_count} coefficients, got {coeffs.size}"
        )
    rows, cols, data = [], [], []
    for k, (src, dst, amp) in enumerate(basis._lowering):
        if coeffs[k] != 0:
            rows.append(dst)
            cols.append(src)
            data.append(coeffs[k] * amp)
    d = basis.dimension
    if not rows:
        return LinearOperator(basis, sp.csr_array((d, d), dtype=complex))
    m = sp.coo_array(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(d, d)
    )
    return LinearOperator(basis, m.tocsr())


def annihilation_op(basis: ModeBasis, mode: int) -> LinearOperator:
    """Lowering operator with <n-1|a|n> = sqrt(n) on ``mode``; a|0> = 0."""
    k = basis.check_mode(mode)
    coeffs = np.zeros(basis.mode_count, dtype=complex)
    coeffs[k] = 1.0
    return mode_sum_annihilation(basis, coeffs)


def creation_op(basis: ModeBasis, mode: int) -> LinearOperator:
    """Conjugate transpose of :func:`annihilation_op`.

    Raising an occupation already at the cutoff (or past ``max_total``)
    leaves the basis, so those columns are zero.
    """
    return annihilation_op(basis, mode).adjoint()


def number_op(basis: ModeBasis, mode: int) -> LinearOperator:
    k = basis.check_mode(mode)
    return diagonal_op(basis, basis.occupations[:, k].astype(float))


def hamiltonian_op(basis: ModeBasis, units: Units = SI) -> LinearOperator:
    """sum_k hbar w_k (n_k + 1/2), diagonal in the occupation basis."""
    occ = basis.occupations.astype(float)
    energies = units.hbar * ((occ + 0.5) @ basis.mode_frequencies)
    return diagonal_op(basis, energies)


def vacuum_energy(basis: ModeBasis, units: Units = SI) -> float:
    return 0.5 * units.hbar * float(np.sum(basis.mode_frequencies))


def vacuum_state(basis: ModeBasis) -> StateVector:
    amps = np.zeros(basis.dimension, dtype=complex)
    amps[basis.index([0] * basis.mode_count)] = 1.0
    return StateVector(basis, amps)


def fock_state(basis: ModeBasis, occupation: Sequence[int]) -> StateVector:
    amps = np.zeros(basis.dimension, dtype=complex)
    amps[basis.index(occupation)] = 1.0
    return StateVector(basis, amps)


def single_photon_state(basis: ModeBasis, mode: int) -> StateVector:
    """a^+(mode)|0>, the monochromatic one-photon state of that mode."""
    psi = creation_op(basis, mode) @ vacuum_state(basis)
    return psi.normalized()
