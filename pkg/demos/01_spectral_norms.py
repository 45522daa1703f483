"""Tour of the spectral core: lattices, transforms, fractional norms.

Builds a couple of explicit fields on the periodic box [-1/2, 1/2)^d,
checks the transform round trip, then prints a table of Lebesgue,
Bessel, Besov and Holder norms.
"""

import numpy as np

from smrlab import (
    Lattice,
    bessel_norm,
    besov_norm,
    derivative,
    dft,
    holder_norm,
    idft,
    lp_blocks,
    lq_norm,
)

lat = Lattice(d=1, K=64)
x = lat.grid_points()[:, 0]

# sin(2 pi x): one Fourier mode, everything about it is known in closed form
f = dft(np.sin(2 * np.pi * x)[None], lat)

back = idft(f)[0, 0].real
print("round trip error     ", np.max(np.abs(back - np.sin(2 * np.pi * x))))
print("L2 norm   (exact 1/sqrt 2)", lq_norm(f, 2))
print("sup norm  (exact 1)       ", lq_norm(f, np.inf))

# the Bessel norm weights mode k by (1 + 4 pi^2 k^2)^(s/2)
for s in (0.0, 0.5, 1.0, 2.0):
    expect = (1 + 4 * np.pi**2) ** (s / 2) / np.sqrt(2)
    print(f"H^{s},2 norm: {bessel_norm(f, s, 2):.6f}   closed form {expect:.6f}")

# derivative lowers smoothness by exactly one order
df = derivative(f, 0)
print("d/dx sin = 2 pi cos: sup =", lq_norm(df, np.inf), " (2 pi =", 2 * np.pi, ")")

# a rough field: random coefficients decaying like |k|^-1.2
rng = np.random.default_rng(0)
coeffs = np.zeros((1, 1) + lat.shape, dtype=np.complex128)
for k in range(1, lat.K):
    z = (rng.standard_normal() + 1j * rng.standard_normal()) * k ** -1.2
    coeffs[0, 0, k] = z
    coeffs[0, 0, -k] = np.conj(z)
g = f.with_coeffs(coeffs)

print()
print("rough field with |k|^-1.2 spectrum")
print("  L2          ", lq_norm(g, 2))
print("  B^0.5_{2,2} ", besov_norm(g, 0.5, 2, 2))
print("  H^{0.5,2}   ", bessel_norm(g, 0.5, 2))
print("  C^0.6       ", holder_norm(g, 0.6))

# dyadic blocks: each block lives on an annulus of frequencies and the
# blocks sum back to the field exactly
dec = lp_blocks(g)
total = np.sum(dec.blocks, axis=0)
print("block count  ", dec.blocks.shape[0])
print("reconstruction error", np.max(np.abs(total - g.coeffs)))
for j in range(dec.blocks.shape[0]):
    print(f"  block {j}: L2 = {lq_norm(dec.field(j), 2):.5f}")
