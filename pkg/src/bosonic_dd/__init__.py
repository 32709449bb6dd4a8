"""Uhrig-type dynamical decoupling and homogenization for bosonic systems.

Subpackages:

* :mod:`bosonic_dd.symplectic` - dense symplectic linear algebra utilities
* :mod:`bosonic_dd.pauli_basis` - tensor-product parametrization of sp(2*2^m)
* :mod:`bosonic_dd.schedules` - Uhrig / nested / bosonic pulse schedules
* :mod:`bosonic_dd.dyson` - exact iterated integrals and vanishing conditions
* :mod:`bosonic_dd.evolution` - time-ordered symplectic propagation, sweeps
* :mod:`bosonic_dd.spin_boson` - exact single-mode-plus-bath Gaussian channel
* :mod:`bosonic_dd.cli` - command-line front end
"""

from .symplectic import (
    ModeLayout,
    symplectic_form,
    is_in_sp_algebra,
    is_symplectic,
    matrix_exponential,
    block_decompose,
    offdiag_residual,
    spectral_norm,
)
from .pauli_basis import (
    MultiIndex,
    s_matrix,
    gamma_set,
    gamma_tilde_set,
    symplectic_inner_product,
    product_index,
    pulse_index,
    pulse_matrix,
    expand_in_basis,
    verify_adjoint_action,
)
from .schedules import (
    PulseSchedule,
    PiecewiseSignFunction,
    udd_times,
    decoupling_schedule,
    flip_train_schedule,
    sigma_function,
    nudd_times,
    nudd_pulses,
    qubit_nudd_schedule,
    substitute_bosonic,
    homogenization_schedule,
    toggling_sign_function,
    write_schedule,
    read_schedule,
)
from .dyson import (
    iterated_integral,
    simplex_bound,
    check_udd_condition,
    check_bosonic_decoupling_condition,
    check_qubit_nudd_condition,
    check_homogenization_condition,
    verify_qubit_bosonic_correspondence,
)
from .evolution import (
    AnalyticGenerator,
    PropagatorConfig,
    propagate,
    resulting_evolution,
    toggling_generator,
    decoupling_residual,
    homogenization_fit,
    order_sweep,
    decoupling_error_bound,
    generator_block_norms,
    affine_propagate,
    random_generator,
)
from .spin_boson import (
    BathSpec,
    ChannelParams,
    y_filter,
    f_filter,
    shear_parameter,
    added_noise,
    noise_spectrum_value,
    thermal_covariance,
    uncontrolled_propagator,
    channel_params,
    channel_apply,
    cross_validate,
    even_flip_train,
)

__version__ = "0.1.0"
