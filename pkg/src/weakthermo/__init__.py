"""Postselected weak-measurement thermometry of a spin coupled to a cantilever pointer."""

from weakthermo.errors import (
    ConfigError,
    ConvergenceError,
    InsensitivePostselectionError,
    InsufficientPrecisionError,
    NonHermitianError,
    OrthogonalPostselectionError,
    TruncationError,
)
from weakthermo.linalg import FockSpace, expectation, fock_operators, hermitian_exp, tensor
from weakthermo.metrology import (
    NO_INFORMATION,
    CrbResult,
    ExperimentRecord,
    QfiResult,
    cramer_rao,
    dSw_dbeta,
    pointer_qfi,
    qfi_analytic,
    qfi_finite_difference,
    simulate_experiment,
)
from weakthermo.pointer import (
    CouplingParams,
    JointState,
    PointerState,
    evolve_exact,
    first_order_state,
    gaussian_ground_state,
    infidelity,
    pointer_readouts,
    postselect_pointer,
    readout_closed_form,
    reconstruct_weak_value,
    weak_final_state,
)
from weakthermo.spin import (
    PostselectionAngles,
    SpinParams,
    build_spin_hamiltonian,
    gibbs_state,
    postselect_state,
)
from weakthermo.weak import (
    InversionCoefficients,
    WeakValue,
    inversion_coefficients,
    invert_beta,
    invert_beta_symmetric_x,
    weak_value_exact,
    weak_value_first_order,
)

__version__ = "0.1.0"
