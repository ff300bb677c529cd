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

import math
from dataclasses import replace

import numpy as np
import pytest
from loguru import logger

from cqedpy.circuit.resonator import ResonatorSpec, calibrate_resonator, solve_modes
from cqedpy.gate.cphase import (
    GateParams,
    MAX_DENSE_DIMENSION,
    ProtocolSchedule,
    PROTOCOL_SETTINGS_DEFAULTS,
    solve_t1,
    analytic_step_unitary,
    compose_gate_closed_form,
    gate_global_phase,
    step_hamiltonian,
    initial_state,
    evolve_steps,
    numeric_gate_block,
    numeric_protocol,
    state_fidelity,
    cphase_equivalence,
    truncation_convergence,
    gate_params_from_settings,
    run_cphase_gate,
)
from cqedpy.operators.algebra import (
    OperatorMatrix,
    SpaceShape,
    basis_state,
    fock_factor,
    matrix_exponential_propagator,
    product_state,
    qubit_factor,
    reduced_density_matrix,
)
from cqedpy.utils.exceptions import (
    ConfigError,
    InvalidArgumentError,
    TruncationError,
    UnsatisfiableConditionError,
    UnsupportedError,
)

RESONATOR_GHZ = 8.01
RATIO = 0.509


@pytest.fixture
def published_params():
    g = RATIO * RESONATOR_GHZ
    return GateParams(
        resonator_frequency_ghz=RESONATOR_GHZ,
        couplings_ghz=(g, g),
        qubit_frequencies_up_ghz=(10.94, 10.94),
        qubit_frequencies_down_ghz=(10.99, 10.99),
    )


@pytest.fixture
def published_schedule(published_params):
    g1, g2 = published_params.couplings_ghz
    return ProtocolSchedule.from_t1(RESONATOR_GHZ, solve_t1(g1, g2, RESONATOR_GHZ))


def two_qubit_shape():
    return SpaceShape((qubit_factor(), qubit_factor()))


def vacuum_rows(gp):
    return np.arange(4) * int(np.prod(gp.fock_dims))


def low_fock_columns(gp, levels=5):
    return np.array([q * gp.n_trunc + n for q in range(4) for n in range(levels)])


def angular_t1(t1_ns, frequency_ghz=RESONATOR_GHZ):
    return 2 * math.pi * frequency_ghz * t1_ns


def test_solve_t1_published_point():
    g = RATIO * RESONATOR_GHZ
    x = angular_t1(solve_t1(g, g, RESONATOR_GHZ))
    assert 0.855 <= x <= 0.865
    assert abs(4 * math.sin(x) * RATIO ** 2 - math.pi / 4) < 1e-12


def test_solve_t1_at_threshold():
    g1 = math.pi / 16 * RESONATOR_GHZ
    x = angular_t1(solve_t1(g1, RESONATOR_GHZ, RESONATOR_GHZ))
    assert abs(x - math.pi / 2) < 1e-6


def test_solve_t1_root_check():
    g = 0.446 * 7.0
    x = angular_t1(solve_t1(g, -g, 7.0), 7.0)
    assert abs(x - 1.409) < 2e-3
    assert abs(4 * math.sin(x) * 0.446 ** 2 - math.pi / 4) < 1e-12


def test_solve_t1_opposite_couplings(published_schedule, published_params):
    """Opposite coupling signs give the same t1, the CPHASE angle only changes sign"""
    g = RATIO * RESONATOR_GHZ
    assert solve_t1(g, -g, RESONATOR_GHZ) == solve_t1(g, g, RESONATOR_GHZ)
    assert solve_t1(-g, -g, RESONATOR_GHZ) == solve_t1(g, g, RESONATOR_GHZ)

    opposite = replace(published_params, couplings_ghz=(g, -g))
    phase = cphase_equivalence(compose_gate_closed_form(published_schedule, opposite))
    assert abs(abs(phase) - math.pi) < 1e-10


def test_solve_t1_below_threshold():
    g = 0.3 * RESONATOR_GHZ
    with pytest.raises(UnsatisfiableConditionError) as exc_info:
        solve_t1(g, g, RESONATOR_GHZ)
    assert "0.19635" in str(exc_info.value)


def test_gate_time(published_schedule):
    assert abs(published_schedule.gate_time_ns - 1 / RESONATOR_GHZ) < 1e-12
    assert abs(published_schedule.gate_time_ns - 0.1248) < 1e-4
    assert math.isclose(sum(published_schedule.rotation_angles), 2 * math.pi)


def test_schedule_validation(published_schedule):
    quarter_period = 1 / (4 * RESONATOR_GHZ)
    with pytest.raises(InvalidArgumentError):
        ProtocolSchedule.from_t1(RESONATOR_GHZ, 1.1 * quarter_period)
    with pytest.raises(InvalidArgumentError):
        replace(published_schedule, t2_ns=published_schedule.t2_ns * 1.01)
    with pytest.raises(InvalidArgumentError):
        replace(published_schedule, ramp_time_ns=published_schedule.t1_ns)
    with pytest.raises(InvalidArgumentError):
        replace(published_schedule, step_flux_settings=((0.0, 0.25),) * 4)


def test_analytic_step_matches_propagator(published_schedule, published_params):
    columns = low_fock_columns(published_params)
    for step in (1, 2):
        analytic = analytic_step_unitary(step, published_schedule, published_params)
        exact = matrix_exponential_propagator(
            step_hamiltonian(step, published_schedule, published_params),
            published_schedule.durations[step - 1],
        )
        assert analytic.unitarity_error() < 1e-10
        difference = analytic.entries[:, columns] - exact.entries[:, columns]
        assert np.abs(difference).max() < 1e-8


def test_uncoupled_step_is_local(published_schedule, published_params):
    gp = replace(published_params, couplings_ghz=(0.0, 0.0))
    analytic = analytic_step_unitary(1, published_schedule, gp)
    exact = matrix_exponential_propagator(
        step_hamiltonian(1, published_schedule, gp), published_schedule.t1_ns
    )
    assert np.abs(analytic.entries - np.diag(np.diag(analytic.entries))).max() < 1e-14
    assert np.abs(analytic.entries - exact.entries).max() < 1e-10


def test_analytic_step_rejects_multimode(published_schedule, published_params):
    gp = replace(
        published_params,
        n_modes=2,
        higher_mode_frequencies_ghz=(24.0,),
        higher_mode_coupling_scales=(-0.5,),
    )
    with pytest.raises(UnsupportedError):
        analytic_step_unitary(1, published_schedule, gp)


def test_composed_steps_give_closed_form(published_schedule, published_params):
    total = analytic_step_unitary(1, published_schedule, published_params)
    for step in (2, 3, 4):
        total = analytic_step_unitary(step, published_schedule, published_params) @ total

    rows = vacuum_rows(published_params)
    block = total.entries[np.ix_(rows, rows)]
    expected = np.exp(1j * gate_global_phase(published_schedule, published_params)) * (
        compose_gate_closed_form(published_schedule, published_params).entries
    )
    assert np.abs(block - expected).max() < 1e-8


def test_closed_form_phases(published_schedule, published_params):
    t1, t2 = published_schedule.t1_ns, published_schedule.t2_ns
    w_up = [2 * math.pi * f for f in published_params.qubit_frequencies_up_ghz]
    w_down = [2 * math.pi * f for f in published_params.qubit_frequencies_down_ghz]
    entangling = 4 * math.sin(published_schedule.rotation_angles[0]) * RATIO ** 2

    expected = []
    for s1, s2 in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
        phase = (
            -(w_up[0] * t1 + w_down[0] * t2) * s1
            - (w_down[1] * t1 + w_up[1] * t2) * s2
            + entangling * s1 * s2
        )
        expected.append(np.exp(1j * phase))

    gate = compose_gate_closed_form(published_schedule, published_params)
    assert np.allclose(np.diag(gate.entries), expected, rtol=0, atol=1e-10)
    assert np.count_nonzero(gate.entries - np.diag(np.diag(gate.entries))) == 0


def test_cphase_equivalence():
    shape = two_qubit_shape()
    assert abs(abs(cphase_equivalence(OperatorMatrix(shape, np.diag([1, 1, 1, -1])))) - math.pi) < 1e-12
    assert cphase_equivalence(OperatorMatrix(shape, np.eye(4))) == 0

    with pytest.raises(InvalidArgumentError):
        cphase_equivalence(OperatorMatrix(shape, np.diag([1, 1, 1, 0.5])))


def test_closed_form_is_cphase_equivalent(published_schedule, published_params):
    phase = cphase_equivalence(compose_gate_closed_form(published_schedule, published_params))
    assert abs(abs(phase) - math.pi) < 1e-10


def test_single_coupling_does_not_entangle(published_schedule, published_params):
    gp = replace(published_params, couplings_ghz=(published_params.couplings_ghz[0], 0.0))
    assert abs(cphase_equivalence(compose_gate_closed_form(published_schedule, gp))) < 1e-12


def test_numeric_protocol_without_transverse_coupling(published_schedule, published_params):
    """Without transverse terms the simulated gate matches the closed form to 1e-8"""
    initial = initial_state(published_params)
    final, report = numeric_protocol(published_schedule, published_params, initial)

    assert abs(np.linalg.norm(final.amplitudes) - 1) < 1e-10
    assert abs(report.fidelity - 1) < 1e-8
    assert abs(report.qubit_purity - 1) < 1e-8
    assert abs(abs(report.two_qubit_phase) - math.pi) < 1e-8
    assert report.n_modes == 1
    assert report.truncation_diagnostics["mode_1"]["max_tail_population"] < 1e-12

    ideal = compose_gate_closed_form(published_schedule, published_params).entries @ (
        initial.amplitudes[vacuum_rows(published_params)]
    )
    overlap = np.vdot(ideal, final.amplitudes[vacuum_rows(published_params)])
    assert abs(abs(overlap) - 1) < 1e-8


def test_numeric_gate_block(published_schedule, published_params):
    block = numeric_gate_block(published_schedule, published_params)
    expected = np.exp(1j * gate_global_phase(published_schedule, published_params)) * (
        compose_gate_closed_form(published_schedule, published_params).entries
    )
    assert np.abs(block.entries - expected).max() < 1e-8


def test_published_fidelity(published_schedule, published_params):
    gp = replace(published_params, transverse=(0.04, 0.04))
    final, report = numeric_protocol(published_schedule, gp, initial_state(gp))
    assert report.fidelity >= 0.996
    assert report.fidelity < 1
    assert np.isclose(
        state_fidelity(final, gp, published_schedule, initial_state(gp)), report.fidelity, atol=1e-12
    )


def test_fidelity_decreases_with_transverse_coupling(published_schedule, published_params):
    fidelities = []
    for c_x in (0.0, 0.02, 0.04, 0.08, 0.135):
        gp = replace(published_params, transverse=(c_x, c_x))
        fidelities.append(numeric_protocol(published_schedule, gp, initial_state(gp))[1].fidelity)
    assert np.all(np.diff(fidelities) < 0)


def test_intermediate_entanglement(published_schedule, published_params):
    initial = initial_state(published_params)
    midway = evolve_steps(published_schedule, published_params, initial, steps=(1, 2, 3))
    assert reduced_density_matrix(midway, [0, 1]).purity() < 0.99

    full = evolve_steps(published_schedule, published_params, initial)
    assert abs(reduced_density_matrix(full, [0, 1]).purity() - 1) < 1e-8


def test_step_merge(published_schedule, published_params):
    gp = replace(published_params, transverse=(0.04, 0.04))
    hamiltonian = step_hamiltonian(1, published_schedule, gp)
    half = matrix_exponential_propagator(hamiltonian, published_schedule.t1_ns / 2)
    full = matrix_exponential_propagator(hamiltonian, published_schedule.t1_ns)
    assert np.abs((half @ half).entries - full.entries).max() < 1e-10


def test_state_fidelity_of_orthogonal_states(published_schedule, published_params):
    initial = initial_state(published_params, "ee")
    final = initial_state(published_params, "gg")
    assert state_fidelity(final, published_params, published_schedule, initial) == pytest.approx(0, abs=1e-14)


def test_state_fidelity_rejects_mismatched_space(published_schedule, published_params):
    smaller = replace(published_params, n_trunc=10)
    with pytest.raises(InvalidArgumentError):
        state_fidelity(
            initial_state(smaller), published_params, published_schedule, initial_state(published_params)
        )


def test_initial_state_must_be_vacuum(published_schedule, published_params):
    excited = product_state(
        basis_state(qubit_factor(), 0),
        basis_state(qubit_factor(), 0),
        basis_state(fock_factor(published_params.n_trunc), 1),
    )
    with pytest.raises(InvalidArgumentError):
        numeric_protocol(published_schedule, published_params, excited)


def test_truncation_failure(published_params):
    g = 1.2 * RESONATOR_GHZ
    gp = replace(published_params, couplings_ghz=(g, g), n_trunc=8)
    sched = ProtocolSchedule.from_t1(RESONATOR_GHZ, solve_t1(g, g, RESONATOR_GHZ))
    with pytest.raises(TruncationError) as exc_info:
        numeric_protocol(sched, gp, initial_state(gp))
    assert exc_info.value.report["mode"] == 1


def test_twelve_levels_do_not_hold_the_working_point(published_schedule, published_params):
    """The loops reach about one photon, twelve Fock levels leave ~1e-4 in the top five"""
    gp = replace(published_params, transverse=(0.04, 0.04), n_trunc=12)
    with pytest.raises(TruncationError) as exc_info:
        numeric_protocol(published_schedule, gp, initial_state(gp))
    assert exc_info.value.report["mode"] == 1


def test_dense_dimension_limit(published_params):
    with pytest.raises(InvalidArgumentError) as exc_info:
        replace(
            published_params,
            n_modes=3,
            n_trunc=30,
            n_trunc_higher=12,
            higher_mode_frequencies_ghz=(24.0, 40.0),
            higher_mode_coupling_scales=(-1.0, 1.0),
        )
    assert "17280" in str(exc_info.value)


def test_truncation_convergence(published_schedule, published_params):
    gp = replace(published_params, transverse=(0.04, 0.04))
    assert truncation_convergence(published_schedule, gp, initial_state(gp)) < 1e-6


def test_random_parameters_match_closed_form():
    """Twenty random coupling and frequency sets above threshold, both coupling signs"""
    rng = np.random.default_rng(2021)
    checked = 0
    while checked < 20:
        ratios = rng.uniform(0.2, 1.2, 2)
        if ratios.prod() < math.pi / 16:
            continue
        frequency = rng.uniform(5.0, 10.0)
        signs = rng.choice([-1.0, 1.0], 2)
        gp = GateParams(
            resonator_frequency_ghz=frequency,
            couplings_ghz=tuple(signs * ratios * frequency),
            qubit_frequencies_up_ghz=tuple(rng.uniform(8.0, 12.0, 2)),
            qubit_frequencies_down_ghz=tuple(rng.uniform(8.0, 12.0, 2)),
            n_trunc=60,
        )
        sched = ProtocolSchedule.from_t1(frequency, solve_t1(*gp.couplings_ghz, frequency))

        closed = compose_gate_closed_form(sched, gp)
        assert abs(abs(cphase_equivalence(closed)) - math.pi) < 1e-10

        block = numeric_gate_block(sched, gp)
        expected = np.exp(1j * gate_global_phase(sched, gp)) * closed.entries
        assert np.abs(block.entries - expected).max() < 1e-7

        _, report = numeric_protocol(sched, gp, initial_state(gp))
        assert abs(report.qubit_purity - 1) < 1e-8
        checked += 1


def test_ramped_switching(published_schedule, published_params):
    """Ramps of a quarter t1 keep the gate time and resolve each ramp with 100 steps"""
    sched = replace(published_schedule, ramp_time_ns=published_schedule.t1_ns / 4)
    final, report = numeric_protocol(sched, published_params, initial_state(published_params))

    assert abs(np.linalg.norm(final.amplitudes) - 1) < 1e-10
    assert report.time_step_ns <= sched.ramp_time_ns / 100
    assert 0 <= report.fidelity <= 1 + 1e-10
    assert report.gate_time_ns == published_schedule.gate_time_ns


def test_two_mode_dynamics(published_schedule, published_params):
    """A second mode at 24 GHz adds its own truncation diagnostics"""
    gp = replace(
        published_params,
        transverse=(0.04, 0.04),
        n_modes=2,
        n_trunc=20,
        n_trunc_higher=10,
        higher_mode_frequencies_ghz=(24.0,),
        higher_mode_coupling_scales=(-0.5,),
    )
    final, report = numeric_protocol(published_schedule, gp, initial_state(gp))

    assert final.shape.dims == (2, 2, 20, 10)
    assert sorted(report.truncation_diagnostics) == ["mode_1", "mode_2"]
    assert 0 <= report.fidelity <= 1 + 1e-10
    assert report.n_modes == 2


@pytest.mark.slow
def test_three_mode_dynamics(published_schedule, published_params):
    """
    Higher modes couple with scales close to 1 in size and do not close their loops at
    2 pi / w_1, so the fidelity drops well beyond 1e-3 at (15, 10, 10) Fock levels.
    """
    bare = ResonatorSpec(
        impedance_ohm=50.0,
        capacitance_ff=850.0,
        half_length_mm=5.0,
        junction_capacitance_ff=17.0,
        n_modes=3,
    )
    modes = solve_modes(calibrate_resonator(bare, RESONATOR_GHZ))

    single = replace(published_params, transverse=(0.04, 0.04))
    multi = replace(single, n_trunc=15, n_trunc_higher=10, truncation_tolerance=1e-4).with_modes(
        modes, 3
    )

    _, reference = numeric_protocol(published_schedule, single, initial_state(single))
    final, report = numeric_protocol(published_schedule, multi, initial_state(multi))
    shift = report.fidelity - reference.fidelity
    logger.info("Three mode fidelity shift: {0:.3e}", shift)

    assert abs(np.linalg.norm(final.amplitudes) - 1) < 1e-10
    assert sorted(report.truncation_diagnostics) == ["mode_1", "mode_2", "mode_3"]
    assert 0 <= report.fidelity <= 1 + 1e-10
    assert 4 * int(np.prod(multi.fock_dims)) <= MAX_DENSE_DIMENSION
    assert shift < -1e-3


def test_run_from_settings():
    """An end-to-end run of the default protocol settings"""
    sched, gp, _, report = run_cphase_gate(PROTOCOL_SETTINGS_DEFAULTS)
    assert 0.855 <= sched.rotation_angles[0] <= 0.865
    assert gp.transverse == (0.04, 0.04)
    assert report.fidelity >= 0.996


def test_settings_errors():
    settings = dict(PROTOCOL_SETTINGS_DEFAULTS)
    del settings["c_x"]
    with pytest.raises(ConfigError) as exc_info:
        gate_params_from_settings(settings)
    assert "c_x" in str(exc_info.value)

    with pytest.raises(ConfigError):
        gate_params_from_settings(dict(PROTOCOL_SETTINGS_DEFAULTS, n_modes=3))

    with pytest.raises(UnsatisfiableConditionError):
        run_cphase_gate(dict(PROTOCOL_SETTINGS_DEFAULTS, g_over_wr=[0.3, 0.3]))


def test_multimode_settings_fit_dense_limit():
    bare = ResonatorSpec(
        impedance_ohm=50.0,
        capacitance_ff=850.0,
        half_length_mm=5.0,
        junction_capacitance_ff=17.0,
        n_modes=3,
    )
    modes = solve_modes(calibrate_resonator(bare, RESONATOR_GHZ))

    gp = gate_params_from_settings(dict(PROTOCOL_SETTINGS_DEFAULTS, n_modes=3), modes)
    assert gp.fock_dims == (15, 10, 10)
    assert gp.truncation_tolerance == 1e-4
    assert 4 * int(np.prod(gp.fock_dims)) <= MAX_DENSE_DIMENSION
    assert np.allclose(gp.higher_mode_coupling_scales, modes.coupling_scales()[1:])

    with pytest.raises(ConfigError) as exc_info:
        gate_params_from_settings(dict(PROTOCOL_SETTINGS_DEFAULTS, n_modes=3, n_trunc_higher=14), modes)
    assert "exceeds" in str(exc_info.value)
