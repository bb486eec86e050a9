"""
Derived constants of a boundary-coupled network
================================================

Every analysis constant — the energy weights c1/c2, the absorbing-set data
(r_star, M, Q), the synchronization threshold R in both readings, and the
convergence rate mu — is a closed-form function of the model parameters
plus two domain quantities: the measure |Omega| and the generalized
Poincare constants eta1, eta2.  This script builds them for the default
two-neuron profile on the unit interval and prints the lot.
"""

import math

from hrnet import HRParameters, build_domain, derive_constants, entry_time, poincare_constants

# 1. the model parameters: classical fast-subsystem constants, adaptation
#    pair (q, r) at a desk-friendly scale, unit diffusivity and coupling
params = HRParameters.default()
print("parameters:", params)

# 2. the domain: unit interval, 128 finite-volume cells.  eta1 is computed
#    from the discrete zero-flux Laplacian; the analytic value for an
#    interval of length L is (pi / L)^2, a useful cross-check.
domain = build_domain(1, [1.0], [128])
pc = poincare_constants(domain, mode="discrete")
analytic = (math.pi / 1.0) ** 2
print(f"\neta1 (discrete) = {pc.eta1:.10f}")
print(f"eta1 (analytic) = {analytic:.10f}   rel diff {abs(pc.eta1-analytic)/analytic:.2e}")

# 3. everything else is algebra
consts = derive_constants(params, domain.omega_measure, pc.eta1, pc.eta2)
print(f"\nc1      = {consts.c1:.6g}    (membrane-energy weight)")
print(f"c2      = {consts.c2:.6g}    (source term of the energy inequality)")
print(f"r_star  = {consts.r_star:.6g}    (uniform dissipation rate)")
print(f"M       = {consts.big_m:.6g}    (asymptotic energy bound per unit measure)")
print(f"Q       = {consts.big_q:.6g}    (absorbing-ball radius)")
print(f"G       = {consts.g:.6g}    (difference-energy weight)")
print(f"mu      = {consts.mu:.6g}    (sufficient synchronization rate)")

# 4. the threshold has two readings whose ratio is exactly N (N - 1): a
#    network-sized one and a per-pair one.  Both are always reported.
print(f"\nR (literal)  = {consts.big_r:.6g}")
print(f"R (per-pair) = {consts.big_r_alt:.6g}")
n = params.n_neurons
print(f"ratio = {consts.big_r / consts.big_r_alt:.6g}  (N (N - 1) = {n * (n - 1)})")

# 5. entry times into the absorbing ball, for a few initial energies: the
#    bound is logarithmic in the initial data and clamps to zero once the
#    initial energy is already inside the asymptotic level
print("\nentry-time bound vs initial energy rho0:")
for rho in (0.0, consts.big_m, 10 * consts.big_m, 1e4 * consts.big_m):
    print(f"  rho0 = {rho:12.6g}  ->  T0 = {entry_time(rho, consts):.6g}")
