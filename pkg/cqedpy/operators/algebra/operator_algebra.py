# Copyright 2021 cqedpy developers

# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at

#     http://www.apache.org/licenses/LICENSE-2.0

# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""
Dense operator algebra on tensor products of qubits and truncated Fock spaces.

Factor ordering is fixed across the package: qubit 1, qubit 2, then the Fock
factors in ascending mode number. Qubit basis index 0 is the excited state |e>
so that sigma_z = diag(+1, -1) and sigma_z|e> = +|e>. Charge factors carry the Cooper
pair number basis of the junction circuit.

Hamiltonians handed to the propagator are expected in angular units (rad/ns) and
times in ns.
"""

import string
from collections import namedtuple
from dataclasses import dataclass
from functools import reduce

import numpy as np
from scipy.linalg import eigh

from cqedpy.utils.exceptions import InvalidArgumentError

QUBIT = "qubit"
FOCK = "fock"
CHARGE = "charge"

HERMITIAN_RTOL = 1e-12
NORM_ATOL = 1e-12
TRACE_ATOL = 1e-10
POSITIVITY_ATOL = 1e-10

HamiltonianSpectrum = namedtuple("HamiltonianSpectrum", ["energies", "vectors", "shape"])


@dataclass(frozen=True)
class Factor:
    kind: str
    dim: int

    def __post_init__(self):
        if self.kind == QUBIT and self.dim != 2:
            raise InvalidArgumentError("A qubit factor has dimension 2")
        if self.kind == FOCK and self.dim < 2:
            raise InvalidArgumentError(f"Fock truncation must be >= 2, got {self.dim}")
        if self.kind == CHARGE and (self.dim < 3 or self.dim % 2 == 0):
            raise InvalidArgumentError(f"A charge factor has odd dimension >= 3, got {self.dim}")
        if self.kind not in (QUBIT, FOCK, CHARGE):
            raise InvalidArgumentError(f"Unknown factor kind '{self.kind}'")


def qubit_factor():
    return Factor(QUBIT, 2)


def fock_factor(n_trunc):
    return Factor(FOCK, int(n_trunc))


def charge_factor(n_max):
    """Cooper pair number basis |n>, n = -n_max..n_max"""
    return Factor(CHARGE, 2 * int(n_max) + 1)


@dataclass(frozen=True)
class SpaceShape:
    """Ordered list of tensor factors. Total dimension is the product of the factors."""

    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if len(self.factors) == 0:
            raise InvalidArgumentError("A space needs at least one factor")

    @property
    def dims(self):
        return tuple(f.dim for f in self.factors)

    @property
    def dim(self):
        return int(np.prod(self.dims))

    @property
    def fock_indices(self):
        return tuple(i for i, f in enumerate(self.factors) if f.kind == FOCK)

    @property
    def qubit_indices(self):
        return tuple(i for i, f in enumerate(self.factors) if f.kind == QUBIT)


def qubit_cavity_shape(n_qubits, fock_truncations):
    """Shape [Q]*n_qubits followed by one Fock factor per entry of fock_truncations."""
    return SpaceShape(
        tuple(qubit_factor() for _ in range(n_qubits))
        + tuple(fock_factor(n) for n in fock_truncations)
    )


def _frozen_array(values, ndim):
    """Read-only copy; real input stays float64, anything else becomes complex128."""
    arr = np.array(values)
    arr = arr.astype(np.float64 if arr.dtype.kind in "biuf" else np.complex128)
    if arr.ndim != ndim:
        raise InvalidArgumentError(f"Expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Square complex matrix acting on the space described by `shape`."""

    shape: SpaceShape
    entries: np.ndarray

    def __post_init__(self):
        entries = _frozen_array(self.entries, 2)
        if entries.shape != (self.shape.dim, self.shape.dim):
            raise InvalidArgumentError(
                f"Matrix of shape {entries.shape} does not match space dimension {self.shape.dim}"
            )
        object.__setattr__(self, "entries", entries)

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            _check_same_shape(self.shape, other.shape)
            return OperatorMatrix(self.shape, self.entries @ other.entries)
        if isinstance(other, StateVector):
            _check_same_shape(self.shape, other.shape)
            return StateVector(self.shape, self.entries @ other.amplitudes)
        return NotImplemented

    def __add__(self, other):
        _check_same_shape(self.shape, other.shape)
        return OperatorMatrix(self.shape, self.entries + other.entries)

    def __sub__(self, other):
        _check_same_shape(self.shape, other.shape)
        return OperatorMatrix(self.shape, self.entries - other.entries)

    def __mul__(self, scalar):
        return OperatorMatrix(self.shape, scalar * self.entries)

    __rmul__ = __mul__

    def dagger(self):
        return OperatorMatrix(self.shape, self.entries.conj().T)

    def hermiticity_error(self):
        """Largest entry of |H - H^dagger| relative to the largest entry of |H|."""
        scale = np.abs(self.entries).max()
        if scale == 0:
            return 0.0
        return float(np.abs(self.entries - self.entries.conj().T).max() / scale)

    def is_hermitian(self, rtol=HERMITIAN_RTOL):
        return self.hermiticity_error() <= rtol

    def unitarity_error(self):
        eye = np.eye(self.shape.dim)
        return float(np.abs(self.entries.conj().T @ self.entries - eye).max())


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalised pure state on `shape`."""

    shape: SpaceShape
    amplitudes: np.ndarray

    def __post_init__(self):
        amplitudes = _frozen_array(self.amplitudes, 1)
        if amplitudes.shape != (self.shape.dim,):
            raise InvalidArgumentError(
                f"State of length {amplitudes.shape[0]} does not match dimension {self.shape.dim}"
            )
        norm = np.linalg.norm(amplitudes)
        if abs(norm - 1.0) > NORM_ATOL:
            raise InvalidArgumentError(f"State norm is {norm!r}, expected 1")
        object.__setattr__(self, "amplitudes", amplitudes)

    def tensor(self):
        """Amplitudes reshaped with one axis per factor."""
        return self.amplitudes.reshape(self.shape.dims)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit trace, positive semi-definite matrix on `shape`."""

    shape: SpaceShape
    entries: np.ndarray

    def __post_init__(self):
        entries = _frozen_array(self.entries, 2)
        dim = self.shape.dim
        if entries.shape != (dim, dim):
            raise InvalidArgumentError(
                f"Density matrix of shape {entries.shape} does not match dimension {dim}"
            )
        if np.abs(entries - entries.conj().T).max() > NORM_ATOL:
            raise InvalidArgumentError("Density matrix is not Hermitian")
        trace = np.trace(entries).real
        if abs(trace - 1.0) > TRACE_ATOL:
            raise InvalidArgumentError(f"Density matrix trace is {trace!r}, expected 1")
        if np.linalg.eigvalsh(entries).min() < -POSITIVITY_ATOL:
            raise InvalidArgumentError("Density matrix has a negative eigenvalue")
        object.__setattr__(self, "entries", entries)

    def purity(self):
        return float(np.real(np.trace(self.entries @ self.entries)))

    def expectation(self, psi):
        """<psi|rho|psi> for a StateVector on the same space."""
        _check_same_shape(self.shape, psi.shape)
        return float(np.real(psi.amplitudes.conj() @ self.entries @ psi.amplitudes))


def _check_same_shape(a, b):
    if a != b:
        raise InvalidArgumentError(f"Space mismatch: {a.dims} vs {b.dims}")


def _fock_operator(matrix, n_trunc):
    return OperatorMatrix(SpaceShape((fock_factor(n_trunc),)), matrix)


def annihilation(n_trunc):
    """Lowering operator with <n-1|a|n> = sqrt(n) on levels 0..n_trunc-1."""
    if int(n_trunc) < 2:
        raise InvalidArgumentError(f"Fock truncation must be >= 2, got {n_trunc}")
    return _fock_operator(np.diag(np.sqrt(np.arange(1, n_trunc)), k=1), n_trunc)


def creation(n_trunc):
    return annihilation(n_trunc).dagger()


def number(n_trunc):
    return _fock_operator(np.diag(np.arange(n_trunc, dtype=float)), n_trunc)


def free_rotation(theta, n_trunc):
    """exp(-i theta a^dagger a)"""
    return _fock_operator(np.diag(np.exp(-1j * theta * np.arange(n_trunc))), n_trunc)


def identity(shape):
    return OperatorMatrix(shape, np.eye(shape.dim))


def _qubit_operator(matrix):
    return OperatorMatrix(SpaceShape((qubit_factor(),)), matrix)


def sigma_x():
    return _qubit_operator([[0, 1], [1, 0]])


def sigma_y():
    return _qubit_operator([[0, -1j], [1j, 0]])


def sigma_z():
    return _qubit_operator([[1, 0], [0, -1]])


def qubit_projector(sign):
    """Projector on the sigma_z eigenstate with eigenvalue `sign` (+1 = |e>, -1 = |g>)."""
    if sign not in (1, -1):
        raise InvalidArgumentError("sign must be +1 or -1")
    return _qubit_operator(np.diag([1.0, 0.0]) if sign == 1 else np.diag([0.0, 1.0]))


def displacement(beta, n_trunc):
    """
    Displacement operator D(beta) = exp(beta a^dagger - beta^* a) on a truncated Fock
    space. The caller picks n_trunc so that |beta|^2 << n_trunc.

    The anti-Hermitian generator G is exponentiated as exp(-i (iG)) through the
    eigendecomposition used by the propagator, so the result is unitary to machine
    precision on the truncated space.
    """
    a = annihilation(n_trunc).entries
    generator = beta * a.conj().T - np.conj(beta) * a
    hermitian = _fock_operator(1j * generator, n_trunc)
    return matrix_exponential_propagator(hermitian, 1.0)


def controlled_displacement(beta, qubit_index, fock_index, shape):
    """
    D(beta sigma_z) = exp((beta a^dagger - beta^* a) sigma_z) with sigma_z on factor
    `qubit_index` and the field on factor `fock_index` of `shape`.
    """
    n_trunc = shape.factors[fock_index].dim
    total = np.zeros((shape.dim, shape.dim), dtype=np.complex128)
    for sign in (1, -1):
        projector = embed(qubit_projector(sign), qubit_index, shape)
        shifted = embed(displacement(sign * beta, n_trunc), fock_index, shape)
        total += projector.entries @ shifted.entries
    return OperatorMatrix(shape, total)


def embed(op, factor_index, shape):
    """
    Lift a single-factor operator to the full space: identity on every other factor and
    `op` on the factor at `factor_index`.
    """
    if not 0 <= factor_index < len(shape.factors):
        raise InvalidArgumentError(
            f"Factor index {factor_index} outside a space of {len(shape.factors)} factors"
        )
    target = shape.factors[factor_index]
    if len(op.shape.factors) != 1 or op.shape.factors[0] != target:
        raise InvalidArgumentError(
            f"Operator on {op.shape.dims} does not match factor {factor_index} ({target.dim})"
        )
    pieces = [
        op.entries if i == factor_index else np.eye(f.dim) for i, f in enumerate(shape.factors)
    ]
    return OperatorMatrix(shape, reduce(np.kron, pieces))


def tensor(*ops):
    """Kronecker product of operators, concatenating their factor lists."""
    shape = SpaceShape(sum((op.shape.factors for op in ops), ()))
    return OperatorMatrix(shape, reduce(np.kron, [op.entries for op in ops]))


def product_state(*states):
    shape = SpaceShape(sum((s.shape.factors for s in states), ()))
    return StateVector(shape, reduce(np.kron, [s.amplitudes for s in states]))


def basis_state(factor, index):
    amplitudes = np.zeros(factor.dim)
    amplitudes[index] = 1.0
    return StateVector(SpaceShape((factor,)), amplitudes)


def plus_state():
    """(|g> + |e>)/sqrt(2)"""
    return StateVector(SpaceShape((qubit_factor(),)), np.ones(2) / np.sqrt(2.0))


def eigendecompose(hamiltonian):
    """Spectral decomposition of a Hermitian operator; raises on non-Hermitian input."""
    error = hamiltonian.hermiticity_error()
    if error > HERMITIAN_RTOL:
        raise InvalidArgumentError(f"Operator is not Hermitian (relative error {error:.3e})")
    energies, vectors = eigh(hamiltonian.entries)
    return HamiltonianSpectrum(energies, vectors, hamiltonian.shape)


def apply_propagator(spectrum, t, vectors):
    """
    exp(-i H t) applied to the column(s) of `vectors` using a precomputed spectrum.
    Avoids forming the full propagator on large spaces.
    """
    phases = np.exp(-1j * spectrum.energies * t)
    coefficients = spectrum.vectors.conj().T @ vectors
    if coefficients.ndim == 1:
        return spectrum.vectors @ (phases * coefficients)
    return spectrum.vectors @ (phases[:, None] * coefficients)


def matrix_exponential_propagator(hamiltonian, t):
    """
    U = exp(-i H t) through the eigendecomposition of H.

    Args:
        hamiltonian (OperatorMatrix): Hermitian generator in rad/ns.
        t (float): Evolution time in ns.

    Returns:
        OperatorMatrix: The unitary propagator.
    """
    spectrum = eigendecompose(hamiltonian)
    phases = np.exp(-1j * spectrum.energies * t)
    unitary = (spectrum.vectors * phases) @ spectrum.vectors.conj().T
    return OperatorMatrix(hamiltonian.shape, unitary)


def _trace_subscripts(n_factors, keep):
    letters = string.ascii_letters
    rows = list(letters[:n_factors])
    cols = [letters[n_factors + i] if i in keep else rows[i] for i in range(n_factors)]
    out = [rows[i] for i in keep] + [cols[i] for i in keep]
    return "".join(rows) + "".join(cols) + "->" + "".join(out)


def _validate_keep(keep, shape):
    keep = tuple(sorted(set(int(k) for k in keep)))
    if len(keep) == 0:
        raise InvalidArgumentError("The set of factors to keep must not be empty")
    if keep[0] < 0 or keep[-1] >= len(shape.factors):
        raise InvalidArgumentError(f"Factor indices {keep} outside the space {shape.dims}")
    return keep


def partial_trace(rho, keep):
    """
    Trace out every factor not listed in `keep`.

    Args:
        rho (DensityMatrix): The state to reduce.
        keep (iterable of int): Factor indices retained, in ascending order in the result.

    Returns:
        DensityMatrix: The reduced state on the kept factors.
    """
    keep = _validate_keep(keep, rho.shape)
    dims = rho.shape.dims
    tensor_form = rho.entries.reshape(dims + dims)
    reduced = np.einsum(_trace_subscripts(len(dims), keep), tensor_form)
    shape = SpaceShape(tuple(rho.shape.factors[i] for i in keep))
    return DensityMatrix(shape, reduced.reshape(shape.dim, shape.dim))


def density_matrix(psi):
    return DensityMatrix(psi.shape, np.outer(psi.amplitudes, psi.amplitudes.conj()))


def reduced_density_matrix(psi, keep):
    """
    Reduced state of a pure state without forming the full density matrix. Equal to
    partial_trace(density_matrix(psi), keep).
    """
    keep = _validate_keep(keep, psi.shape)
    discard = [i for i in range(len(psi.shape.factors)) if i not in keep]
    moved = np.transpose(psi.tensor(), list(keep) + discard)
    shape = SpaceShape(tuple(psi.shape.factors[i] for i in keep))
    matrix = moved.reshape(shape.dim, -1)
    return DensityMatrix(shape, matrix @ matrix.conj().T)


def fock_populations(psi, factor_index):
    """Occupation probabilities of each level of one Fock factor."""
    rho = reduced_density_matrix(psi, [factor_index])
    return np.clip(np.real(np.diag(rho.entries)), 0.0, None)
