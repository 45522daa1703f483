"""Coefficient sets and the stochastic parabolicity margin.

The margin is the sampled infimum of the quadratic form built from the
symmetric part of a minus the Ito correction (1/2) sum_n b b.  Positive
margin is the coercivity that makes the second-order system solvable.
"""

import numpy as np

from smrlab import (
    CoefficientSet,
    Lattice,
    TimeProfile,
    coefficients_to_recipe,
    evaluate_form,
    freeze_coefficients,
    parabolicity_margin,
    recipe_to_coefficients,
)


def scalar_set(a, b, profile=None):
    lat = Lattice(d=1, K=16)
    a_hat = np.zeros((1, 1, 1, 1) + lat.shape, dtype=np.complex128)
    a_hat[0, 0, 0, 0, 0] = a
    b_hat = np.zeros((1, 1, 1) + lat.shape, dtype=np.complex128)
    b_hat[0, 0, 0, 0] = b
    return CoefficientSet(lat, a_hat, b_hat, alpha=2.0, time_profile=profile)


# pure Laplacian: no noise correction, margin 1 exactly
print("a=1, b=0         margin", parabolicity_margin(scalar_set(1.0, 0.0), 1.0))

# the critical noise strength: (1/2) b^2 = 1 eats the whole ellipticity
print("a=1, b=sqrt(2)   margin", parabolicity_margin(scalar_set(1.0, np.sqrt(2))).margin)

# subcritical noise leaves a margin of 1 - 0.75 = 0.25
rep = parabolicity_margin(scalar_set(1.0, np.sqrt(1.5)), vartheta=0.2)
print("a=1, b=sqrt(1.5) margin", rep.margin, " vartheta 0.2 passed:", rep.passed)
print("witness (t, x, xi, eta):", rep.witness)
w = rep.witness
print("form at witness:",
      evaluate_form(scalar_set(1.0, np.sqrt(1.5)), w["t"], w["x"], w["xi"], w["eta"]))

# a time profile rho(t) scales the noise intensity; the cosine profile
# dips to rho_min where the margin is smallest
prof = TimeProfile("cosine", rho_min=0.5, rho_max=1.0, period=1.0)
print("cosine profile   margin", parabolicity_margin(scalar_set(1.0, np.sqrt(1.5), prof)).margin)

# recipes are plain dictionaries: easy to store next to experiment output
recipe = {
    "lattice": {"d": 1, "K": 16},
    "m": 1,
    "n_noise": 1,
    "alpha": 2.2,
    "a": [{"i": 0, "j": 0, "constant": 1.0,
           "perturbation": {"amplitude": 0.3, "smoothness": 2.2, "seed": 5, "sup_cap": 0.25}}],
    "b": [{"j": 0, "k": 0, "n": 0, "constant": 0.5}],
}
cs = recipe_to_coefficients(recipe)
print()
print("perturbed set: constant?", cs.is_constant)
print("margin with x-dependent a:", parabolicity_margin(cs).margin)
assert coefficients_to_recipe(cs) == recipe

# freezing evaluates the coefficients at one point; the frozen margin
# cannot drop below the sampled infimum at that point
frozen = freeze_coefficients(cs, np.array([0.25]))
print("frozen at x=1/4: constant?", frozen.is_constant,
      " margin", parabolicity_margin(frozen).margin)

# refinement of the sample families never raises the reported margin
for n in (8, 16, 32):
    m = parabolicity_margin(cs, n_x=n, n_xi=n, n_eta=n).margin
    print(f"sampling level {n:2d}: margin {m:.12f}")
