#!/usr/bin/env python3
"""Tour of the spin-3 building blocks: operators, states, and metrics.

The system is a single spin F=3 (a 7-dimensional Hilbert space). Everything
else in the package is built from the angular-momentum matrices, the state
constructors, and the overlap/squeezing metrics shown here.
"""
import numpy as np

import spinctl as sc

sys7 = sc.build_spin_system(3)
print("F_z diagonal:", np.diag(sys7.fz).real)
print("F_x ladder element <3|F_x|2> =", sys7.fx[0, 1].real, "(= sqrt(6)/2)")

# Commutation relations close the su(2) algebra
comm = sys7.fx @ sys7.fy - sys7.fy @ sys7.fx
print("||[Fx, Fy] - i Fz|| =", np.max(np.abs(comm - 1j * sys7.fz)))

# Adding the quadratic light shift upgrades control from SO(3) rotations to
# the full SU(7): the generated Lie algebra saturates 7^2 - 1 = 48
print("dim Lie closure {Fx, Fy}       =", sc.lie_closure_dimension([sys7.fx, sys7.fy]))
print("dim Lie closure {Fx, Fy, Fx^2} =",
      sc.lie_closure_dimension([sys7.fx, sys7.fy, sys7.fx2]))

# A stretched (spin coherent) state along +y: the optically pumped start
psi0 = sc.stretched_state(sys7, (0, 1, 0), 3)
print("\n|m_y=3>: <Fy> =", round(sc.expectation(psi0, sys7.fy), 6),
      " Var(Fx) =", round(sc.variance(psi0, sys7.fx), 6))
print("population on m_z=3:", round(abs(psi0.data[0]) ** 2, 6), "(binomial 1/64)")

# Overlap metrics: squared overlap for pure states, Uhlmann amplitude for
# density matrices. For a pure target the amplitude is sqrt(<chi|rho|chi>).
cat = sc.target_library("cat_z2", sys7)
print("\nyield_pure(|m_y=3>, cat) =", sc.yield_pure(cat, psi0))
rho = sc.QuantumState.mixed(0.96 * cat.density() + 0.04 * np.eye(7) / 7)
print("yield_mixed(cat, 0.96 cat + 0.04 I/7) =", sc.yield_mixed(cat, rho))

# Squeezing figures: a coherent state is the 0 dB reference
res = sc.squeezing_parameter(psi0, (1, 0, 0), (0, 1, 0))
print("\ncoherent-state squeezing: xi_n =", round(res.xi_normalized, 9),
      " dB =", round(res.squeezing_db, 9))
