"""Stern-Gerlach wavepacket dynamics: closed-form and split-operator propagation,
Ehrenfest checks, spin-coherence loss and a Bohm-number regime scan."""

__version__ = "0.1.0"

from .core import (ApparatusGeometry, Branch, GaussianPacket, PhysParams, SpinWeights,  # noqa: E402
                   bohm_number, make_initial_state)
from .spectral import GridSpec, SpinorGridState, auto_grid, evolve, step  # noqa: E402
from .analytic import (branch_overlap_analytic, evolve_branch_analytic,  # noqa: E402
                       sample_on_grid)

__all__ = [
    "ApparatusGeometry", "Branch", "GaussianPacket", "PhysParams", "SpinWeights",
    "bohm_number", "make_initial_state", "GridSpec", "SpinorGridState", "auto_grid",
    "evolve", "step", "branch_overlap_analytic", "evolve_branch_analytic", "sample_on_grid",
]
