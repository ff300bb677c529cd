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

from .protocol import (
    GateParams,
    ProtocolSchedule,
    GateReport,
    PROTOCOL_SETTINGS_DEFAULTS,
    CPHASE_THRESHOLD,
    MAX_DENSE_DIMENSION,
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
    schedule_from_settings,
    run_cphase_gate,
)
