"""Polar Dirac quantum walk: simulator, observables and verification harness."""

from .em import (
    PotentialSpec,
    UniformMagneticSpec,
    step_em,
    u_em,
    uniform_b_potential,
)
from .landau import (
    LandauSpec,
    eigenstate_field,
    laguerre,
    make_landau_spec,
    normalization_quadrature_check,
    ode_residual,
)
from .observables import (
    angular_momentum,
    conservation_audit,
    even_mode_energy_fraction,
    orbital_spin_decomposition,
    theta_spectrum,
)
from .spinor import (
    PolarGrid,
    SpinorField,
    change_spin_basis,
    inner_product,
    l1_distance,
    make_grid,
    sample_field,
)
from .walk import WalkParams, step_free

__version__ = "0.1.0"
