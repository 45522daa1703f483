"""Bony product splitting, multiplication inequalities, localization tools."""

import numpy as np

from smrlab import (
    Lattice,
    bony_decompose,
    build_cover,
    derive_key,
    extension_operator,
    eval_at,
    generate_holder_field,
    idft,
    lq_norm,
    multiply,
    partition_of_unity,
    probe_multiplication,
)

lat = Lattice(d=1, K=128)

f = generate_holder_field(lat, alpha=1.2, amplitude=1.0, seed=1)
g = generate_holder_field(lat, alpha=1.6, amplitude=1.0, seed=2)

# fg = T_f g + R(f,g) + T_g f, computed on a 3/2 dealiased grid so the
# identity holds to machine precision
tri = bony_decompose(f, g)
prod = multiply(f, g)
gap = tri.T_fg.coeffs + tri.R_fg.coeffs + tri.T_gf.coeffs - prod.coeffs
print("Bony reconstruction error", np.max(np.abs(gap)))
print("piece sizes  T_fg:", lq_norm(tri.T_fg, 2), " R:", lq_norm(tri.R_fg, 2),
      " T_gf:", lq_norm(tri.T_gf, 2))

# each estimate is probed as an LHS/RHS ratio; bounded ratios over many
# random pairs is the numerical face of the inequality
print()
cases = [
    ("P1", {"s": 0.5, "q": 2}),
    ("P2", {"s": 0.5, "q": 2, "tau": 1.4}),
    ("P3", {"s": 0.5, "q": 2, "tau": 1.4, "zeta": 4}),
    ("P4", {"s": 0.5, "q": 2, "tau": 1.4}),
    ("COR", {"s": 0.5, "q": 2, "xi": 2, "eta": 1.1}),
]
for case, params in cases:
    ratios = []
    for i in range(25):
        fi = generate_holder_field(lat, 1.2, 1.0, derive_key(3, i, 0))
        gi = generate_holder_field(lat, 1.6, 1.0, derive_key(3, i, 1))
        ratios.append(probe_multiplication(case, fi, gi, params).ratio)
    print(f"case {case:3s}: max ratio {max(ratios):.4f}  mean {np.mean(ratios):.4f}")

# extension: rebuild a field from its values on a small ball without
# increasing the sup norm
print()
y, r = np.array([0.2]), 1.0 / 16
ext = extension_operator(f, y, r)
pts = y[None] + r * np.linspace(-1, 1, 400)[:, None]
ball_sup = np.max(np.abs(eval_at(f, pts)[0, 0]))
print("sup on ball      ", ball_sup)
print("sup of extension ", lq_norm(ext, np.inf))

inside = np.abs(((lat.grid_points()[:, 0] - y[0] + 0.5) % 1.0) - 0.5) <= r
fv = idft(f)[0, 0].real
ev = idft(ext)[0, 0].real
print("restriction error", np.max(np.abs(fv[inside] - ev[inside])))

# finite ball cover of the torus with a smooth partition of unity
cover = build_cover(eta=0.5, alpha=1.0, c_ab=1.5, c_norm=2.0, d=1)
pou = partition_of_unity(cover, lat)
total = idft(pou.total())[0, 0].real
print()
print("cover: radius =", cover.radius, " balls =", len(cover.centers))
print("partition of unity sum error", np.max(np.abs(total - 1.0)))
