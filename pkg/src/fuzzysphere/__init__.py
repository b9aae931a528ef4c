"""Numerical companion for matrix algebras converging to the sphere.

Submodules: ``groupmodel`` (SU(2) length, frames, finite groups), ``repn``
(spin irreps, coherent states), ``seminorms`` (Lipschitz seminorms),
``berezin`` (symbols and transforms), ``bridge`` (bridge seminorm and
constants), ``statespace`` (states and Monge-Kantorovich distances),
``optsolve`` (ratio maximization) and ``cli``.
"""

from .berezin import berezin_context, berezin_transform, contravariant_symbol, covariant_symbol, delta_A
from .bridge import bridge_N, gamma_A, gamma_B, delta_B, prox_bound
from .errors import *  # noqa: F401,F403
from .groupmodel import su2_frame, su2_length_of
from .repn import spin_irrep
from .seminorms import function_lipnorm, matrix_lipnorm
from .statespace import pair_rho, rho_L

__version__ = "0.1.0"
