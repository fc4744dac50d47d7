"""Isomonodromic tau functions on the punctured torus.

Two independent routes to the same tau function: truncated Fredholm
determinants of explicit hypergeometric kernels, and charged-partition
(dual partition function) series; plus the dynamical identities that
tie them to the nonautonomous two-particle elliptic system.
"""

from ._backend import backend_name
from .fredholm import (
    BlockLayout,
    TruncatedOperator,
    assemble_K11,
    assemble_K1n,
    assemble_widom_form,
    det_I_minus_K,
    log_det_I_minus_K,
    widom_constant,
)
from .isomon import (
    TauAssembly,
    TrajectoryPoint,
    assemble_tau_cm,
    assemble_tau_garnier,
    rank1_prefactors,
    solve_Q_rho_fit,
    solve_Q_theta_ratio,
    trajectory_point,
    upsilon_ratio,
    verify_eom,
    verify_hamiltonian,
)
from .nekrasov import (
    ChargedPartition,
    GarnierConfig,
    Partition,
    maya_from_charged,
    partitions_up_to,
    tau_cm_series,
    tau_garnier_series,
    z_bif,
    z_inst,
    z_pert_ratio,
)
from .specfun import (
    ThetaTruncation,
    TorusModulus,
    acycle_integral_identities,
    dedekind_eta,
    gamma_fn,
    gamma_ratio_shift,
    hyp2f1,
    theta1,
    theta_char,
    weierstrass_p,
)
from .threept import (
    CircleGrid,
    CoefficientTable,
    MonodromyData,
    default_grid,
    fourier_coefficients,
    kernel_block,
    y_in,
    y_out,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
