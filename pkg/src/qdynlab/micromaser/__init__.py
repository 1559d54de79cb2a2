"""Repeated-interaction cavity: channels, closed forms and full-system checks."""

from .channels import (
    cavity_channel,
    check_state,
    iterate,
    iterate_states,
    one_atom_channel,
    one_atom_channel_leaky,
    photon_numbers,
)
from .characteristic import (
    CharFactors,
    characteristic_factors,
    characteristic_function,
    limiting_characteristic,
    quasifree_defect,
)
from .energy import (
    LeakyEnergyVariation,
    energy_cumulative_perfect_reversed_order,
    energy_step_perfect_reversed_order,
    energy_variation_leaky,
    energy_variation_perfect,
    energy_variation_perfect_cumulative,
    interaction_energy_entering,
    interaction_energy_leaving,
    leaky_energy_jump,
    leaky_energy_limit,
    leaky_limit_bounds,
    leaky_pumping_part,
)
from .entropy import entropy_production, gibbs_photon_number, gibbs_state, relative_entropy
from .oracle import FullSystemOracle
from .params import MicromaserParams
from .photons import (
    NumberOpCoefficients,
    dual_number_coefficients,
    dual_number_recursive,
    dual_number_step,
    photon_number_closed,
    photon_number_limit,
    pumping_rate,
)
