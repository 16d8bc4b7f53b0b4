"""Entropy pairs: the special entropy from a Goursat problem and weak entropy pairs from kernels."""
from nsp_lab.entropy.kernel import (
    KernelExpansion,
    KernelGrid,
    TestFunction,
    chi_closed_form,
    chi_general,
    closed_form_deviation,
    entropy_equation_residual,
    kernel_growth,
    kernel_mass,
    mechanical_hessian,
    mechanical_pair,
    sigma_minus_u_chi,
    weak_entropy_pair,
)
from nsp_lab.entropy.special import (
    GoursatField,
    GoursatResiduals,
    SpecialEntropyPair,
    bound_constants,
    boundary_gap,
    characteristics_through,
    dissipation_identity,
    exterior_identity,
    goursat_residuals,
    solve_goursat,
    special_entropy,
    special_flux,
)

__all__ = (
    "GoursatField",
    "GoursatResiduals",
    "KernelExpansion",
    "KernelGrid",
    "SpecialEntropyPair",
    "TestFunction",
    "bound_constants",
    "boundary_gap",
    "characteristics_through",
    "chi_closed_form",
    "chi_general",
    "closed_form_deviation",
    "dissipation_identity",
    "entropy_equation_residual",
    "exterior_identity",
    "goursat_residuals",
    "kernel_growth",
    "kernel_mass",
    "mechanical_hessian",
    "mechanical_pair",
    "sigma_minus_u_chi",
    "solve_goursat",
    "special_entropy",
    "special_flux",
)
