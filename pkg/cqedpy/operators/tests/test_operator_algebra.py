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

# pylint: disable=redefined-outer-name

import itertools

import numpy as np
import pytest
from scipy.linalg import expm

from cqedpy.operators.algebra import (
    SpaceShape,
    OperatorMatrix,
    StateVector,
    qubit_factor,
    fock_factor,
    annihilation,
    creation,
    number,
    free_rotation,
    identity,
    sigma_x,
    sigma_y,
    sigma_z,
    displacement,
    controlled_displacement,
    embed,
    product_state,
    basis_state,
    plus_state,
    matrix_exponential_propagator,
    partial_trace,
    density_matrix,
    reduced_density_matrix,
    fock_populations,
)
from cqedpy.utils.exceptions import InvalidArgumentError


@pytest.fixture
def rng():
    return np.random.default_rng(20110607)


def random_complex(rng, radius=1.0):
    """Uniform sample from the disc of the given radius"""
    r = radius * np.sqrt(rng.uniform())
    return r * np.exp(2j * np.pi * rng.uniform())


def test_annihilation_small():
    a = annihilation(2).entries
    assert np.array_equal(a, np.array([[0, 1], [0, 0]], dtype=complex))

    a = annihilation(4).entries
    assert np.isclose(a[2, 3], np.sqrt(3))


def test_annihilation_commutator_on_truncated_space():
    n_trunc = 7
    a = annihilation(n_trunc).entries
    ad = creation(n_trunc).entries
    expected = np.eye(n_trunc)
    expected[-1, -1] -= n_trunc
    assert np.allclose(a @ ad - ad @ a, expected, atol=1e-14)


def test_annihilation_rejects_small_dimension():
    with pytest.raises(InvalidArgumentError):
        annihilation(1)


def test_displacement_zero_is_identity():
    d = displacement(0.0, 12)
    assert np.allclose(d.entries, np.eye(12), atol=1e-14)


def test_displacement_inverse(rng):
    for _ in range(10):
        beta = random_complex(rng)
        d = displacement(beta, 20).entries
        d_inv = displacement(-beta, 20).entries
        assert np.abs(d @ d_inv - np.eye(20)).max() < 1e-10


def test_displacement_composition_identity(rng):
    """D(a)D(b) = exp(i Im(a b*)) D(a + b) on the low Fock levels"""
    n_trunc = 40
    for _ in range(50):
        alpha = random_complex(rng)
        beta = random_complex(rng)
        lhs = displacement(alpha, n_trunc).entries @ displacement(beta, n_trunc).entries
        rhs = np.exp(1j * np.imag(alpha * np.conj(beta))) * displacement(
            alpha + beta, n_trunc
        ).entries
        assert np.abs(lhs[:, :3] - rhs[:, :3]).max() < 1e-8


def test_displacement_rotation_identity(rng):
    """exp(-i theta n) D(a) exp(i theta n) = D(a exp(-i theta))"""
    n_trunc = 30
    for _ in range(50):
        alpha = random_complex(rng)
        theta = rng.uniform(0, 2 * np.pi)
        rotation = free_rotation(theta, n_trunc).entries
        lhs = rotation @ displacement(alpha, n_trunc).entries @ rotation.conj().T
        rhs = displacement(alpha * np.exp(-1j * theta), n_trunc).entries
        assert np.abs(lhs - rhs).max() < 1e-8


def test_displacement_creates_coherent_state():
    n_trunc = 40
    beta = 0.7 - 0.4j
    vacuum = np.zeros(n_trunc)
    vacuum[0] = 1
    state = displacement(beta, n_trunc).entries @ vacuum
    n = np.arange(n_trunc)
    log_factorial = np.cumsum(np.log(np.maximum(n, 1)))
    expected = np.exp(-abs(beta) ** 2 / 2) * beta ** n / np.exp(0.5 * log_factorial)
    assert np.abs(state - expected).max() < 1e-12
    assert np.isclose(np.real(state.conj() @ number(n_trunc).entries @ state), abs(beta) ** 2)


def test_embed_sigma_z_convention():
    shape = SpaceShape((qubit_factor(), qubit_factor()))
    op = embed(sigma_z(), 0, shape)
    # |e, g> is basis index 0 * 2 + 1
    e_g = np.zeros(4)
    e_g[1] = 1
    assert np.isclose(e_g @ op.entries @ e_g, 1.0)


def test_embed_identity_and_kronecker():
    shape = SpaceShape((qubit_factor(), qubit_factor(), fock_factor(3)))
    assert np.array_equal(embed(identity(SpaceShape((fock_factor(3),))), 2, shape).entries, np.eye(12))

    two_qubits = SpaceShape((qubit_factor(), qubit_factor()))
    product = embed(sigma_x(), 0, two_qubits) @ embed(sigma_z(), 1, two_qubits)
    assert np.array_equal(product.entries, np.kron(sigma_x().entries, sigma_z().entries))


def test_embed_is_homomorphism():
    shape = SpaceShape((fock_factor(4), qubit_factor(), qubit_factor()))
    for a, b in itertools.product([sigma_x(), sigma_y(), sigma_z()], repeat=2):
        lhs = embed(a @ b, 1, shape)
        rhs = embed(a, 1, shape) @ embed(b, 1, shape)
        assert np.array_equal(lhs.entries, rhs.entries)


def test_embed_rejects_mismatch():
    shape = SpaceShape((qubit_factor(), fock_factor(3)))
    with pytest.raises(InvalidArgumentError):
        embed(sigma_z(), 1, shape)
    with pytest.raises(InvalidArgumentError):
        embed(sigma_z(), 2, shape)


def test_controlled_displacement_blocks():
    shape = SpaceShape((qubit_factor(), fock_factor(15)))
    beta = 0.3 + 0.1j
    op = controlled_displacement(beta, 0, 1, shape).entries
    assert np.allclose(op[:15, :15], displacement(beta, 15).entries, atol=1e-14)
    assert np.allclose(op[15:, 15:], displacement(-beta, 15).entries, atol=1e-14)
    assert np.abs(op[:15, 15:]).max() == 0


def test_propagator_trivial_cases():
    shape = SpaceShape((qubit_factor(),))
    zero = OperatorMatrix(shape, np.zeros((2, 2)))
    assert np.allclose(matrix_exponential_propagator(zero, 1.3).entries, np.eye(2))

    omega, t = 2 * np.pi * 5.0, 0.031
    h = sigma_z() * (omega / 2)
    u = matrix_exponential_propagator(h, t).entries
    expected = np.diag([np.exp(-1j * omega * t / 2), np.exp(1j * omega * t / 2)])
    assert np.allclose(u, expected, atol=1e-12)


def test_propagator_matches_pade_oracle(rng):
    shape = SpaceShape((qubit_factor(), qubit_factor(), qubit_factor()))
    x = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    h = OperatorMatrix(shape, (x + x.conj().T) / 2)
    u = matrix_exponential_propagator(h, 0.7)
    assert u.unitarity_error() < 1e-10
    assert np.abs(u.entries - expm(-1j * 0.7 * h.entries)).max() < 1e-9


def test_propagator_rejects_non_hermitian():
    shape = SpaceShape((qubit_factor(),))
    with pytest.raises(InvalidArgumentError):
        matrix_exponential_propagator(OperatorMatrix(shape, [[0, 1], [0, 0]]), 1.0)


def test_propagator_unitary_for_coupled_qubit_cavity():
    n_trunc = 25
    shape = SpaceShape((qubit_factor(), fock_factor(n_trunc)))
    a = embed(annihilation(n_trunc), 1, shape)
    h = (
        embed(sigma_z(), 0, shape) * (2 * np.pi * 5.5)
        + (a.dagger() @ a) * (2 * np.pi * 8.0)
        - ((a + a.dagger()) @ embed(sigma_z(), 0, shape)) * (2 * np.pi * 4.0)
    )
    u = matrix_exponential_propagator(h, 0.05)
    assert u.unitarity_error() < 1e-10


def test_partial_trace_product_state():
    psi_a = StateVector(SpaceShape((qubit_factor(),)), np.array([0.6, 0.8j]))
    vacuum = basis_state(fock_factor(5), 0)
    rho = density_matrix(product_state(psi_a, vacuum))
    reduced = partial_trace(rho, [0])
    assert np.allclose(reduced.entries, np.outer(psi_a.amplitudes, psi_a.amplitudes.conj()))


def test_partial_trace_maximally_entangled():
    shape = SpaceShape((qubit_factor(), fock_factor(2)))
    bell = StateVector(shape, np.array([1, 0, 0, 1]) / np.sqrt(2))
    reduced = partial_trace(density_matrix(bell), [0])
    assert np.allclose(reduced.entries, np.eye(2) / 2)
    assert np.isclose(reduced.purity(), 0.5)


def test_partial_trace_matches_index_summation(rng):
    shape = SpaceShape((qubit_factor(), fock_factor(3), qubit_factor()))
    amplitudes = rng.normal(size=12) + 1j * rng.normal(size=12)
    psi = StateVector(shape, amplitudes / np.linalg.norm(amplitudes))
    rho = density_matrix(psi)
    reduced = partial_trace(rho, [0, 2])

    # Explicit double sum over the traced Fock index
    t = psi.tensor()
    oracle = np.zeros((4, 4), dtype=complex)
    for i, j, k, l in itertools.product(range(2), repeat=4):
        oracle[2 * i + j, 2 * k + l] = sum(t[i, m, j] * np.conj(t[k, m, l]) for m in range(3))

    assert np.abs(reduced.entries - oracle).max() < 1e-12
    assert abs(reduced.purity() - np.real(np.trace(oracle @ oracle))) < 1e-12
    assert np.isclose(np.trace(reduced.entries).real, 1.0, atol=1e-10)
    assert np.abs(reduced.entries - reduced.entries.conj().T).max() < 1e-10


def test_reduced_density_matrix_matches_partial_trace(rng):
    shape = SpaceShape((qubit_factor(), qubit_factor(), fock_factor(4)))
    amplitudes = rng.normal(size=16) + 1j * rng.normal(size=16)
    psi = StateVector(shape, amplitudes / np.linalg.norm(amplitudes))
    for keep in ([0], [1], [0, 1], [2], [0, 2]):
        direct = reduced_density_matrix(psi, keep).entries
        traced = partial_trace(density_matrix(psi), keep).entries
        assert np.abs(direct - traced).max() < 1e-13


def test_partial_trace_rejects_empty_keep():
    rho = density_matrix(plus_state())
    with pytest.raises(InvalidArgumentError):
        partial_trace(rho, [])


def test_state_vector_rejects_unnormalised():
    with pytest.raises(InvalidArgumentError):
        StateVector(SpaceShape((qubit_factor(),)), np.array([1.0, 1.0]))


def test_expectation_overlap():
    rho = density_matrix(plus_state())
    assert np.isclose(rho.expectation(plus_state()), 1.0)
    assert np.isclose(rho.expectation(basis_state(qubit_factor(), 0)), 0.5)

    with pytest.raises(InvalidArgumentError):
        rho.expectation(basis_state(fock_factor(3), 0))


def test_fock_populations_of_coherent_state():
    n_trunc = 40
    beta = 0.9 + 0.3j
    state = displacement(beta, n_trunc).entries[:, 0]
    cavity = StateVector(SpaceShape((fock_factor(n_trunc),)), state / np.linalg.norm(state))
    psi = product_state(plus_state(), cavity)

    populations = fock_populations(psi, 1)
    n = np.arange(n_trunc)
    log_factorial = np.cumsum(np.log(np.maximum(n, 1)))
    poisson = np.exp(-abs(beta) ** 2 + n * np.log(abs(beta) ** 2) - log_factorial)
    assert populations.shape == (n_trunc,)
    assert np.abs(populations - poisson).max() < 1e-10
    assert np.allclose(fock_populations(psi, 0), [0.5, 0.5])
