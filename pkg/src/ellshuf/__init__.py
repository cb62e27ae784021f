"""Elliptic shuffle algebra attached to a quiver.

Layers: theta numerics (`theta`), expression trees (`expr`), quiver
combinatorics (`quiver`), the shuffle product/coproduct/braiding (`shuffle`),
Drinfeld currents and relation verifiers (`currents`), residues and the Hopf
pairing (`pairing`), the rank-one representation (`rep_sl2`), and the CLI
harness (`cli`).
"""

from .theta import (PoleError, eta, g_section, lattice_distance,
                    lattice_reduce, theta, theta_deriv, theta_jet, wp)
from .expr import (Const, Deriv, GSection, HBAR, IntPow, LinearForm,
                   PoleProximityError, Product, Sum, T1, T2, Theta,
                   UnboundVariableError, Var, add, const, eval_expr, free_vars,
                   from_json, lf, mul, pole_divisors, pw, recip, substitute,
                   symmetrize, to_json)
from .quiver import (Arrow, BUILTIN_QUIVERS, Quiver, a1, a2, dim_add,
                     dim_total, enumerate_partitions, enumerate_shuffles,
                     kronecker, load_quiver, quiver_from_json, zvar, zvars)
from .shuffle import (ShuffleElement, braided_product_component,
                      braiding_factor, cartan_action, coproduct_component,
                      element, fac, fac1, fac2, index_forms, shuffle_product,
                      unit)
from .currents import (Current, RelationReport, current_minus, current_plus,
                       verify_EQ1_EQ2, verify_EQ3, verify_EQ4, verify_EQ5,
                       verify_term_identity)
from .pairing import (ResidueTask, find_pole_centers, hopf_pairing,
                      iterated_residue, residue, total_residue,
                      verify_double_relation)
from .rep_sl2 import (WeightFunction, WeightSpace, cartan_H, drinfeld_kernel,
                      verify_sl2_EQ5, x_minus, x_plus)

__version__ = "0.1.0"
