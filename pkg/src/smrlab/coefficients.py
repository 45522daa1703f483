"""Coefficient families for the second-order systems and their parabolicity.

A coefficient set holds

    a^{i,j}(t,x)   m x m matrix valued, i,j = 0..d-1   (second order part)
    b^{j}_{k,n}(t,x)  scalar per component k and noise channel n <= N_noise
                      (gradient-noise part, diagonal in the component index)

with Holder-continuous spatial dependence and a multiplicative time profile
rho(t): a scales by rho, b by sqrt(rho), so the parabolicity structure is
preserved in time.

Stochastic parabolicity is quantified by the sampled infimum of

    sum_{i,j} ( [(a_sym^{i,j} - Psi^{i,j}) eta] . eta ) xi_i xi_j

over times t, spatial points x, unit xi in R^d and unit eta in R^m, where
Psi^{i,j} is the diagonal matrix with entries (1/2) sum_n b^j_{l,n} b^i_{l,n}.
Only the symmetric part of a enters the form.  Sample families are nested
under refinement (coordinate directions first, then a deterministic
direction sequence; spatial points in a fixed hashed order; dyadic times),
so reported margins never increase when the sample counts grow.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import _rng
from .errors import ParameterError
from .spectral import (
    Lattice,
    SpectralField,
    constant_field,
    eval_at,
    holder_norm,
    idft,
    _pad_values,
)

__all__ = [
    "CoefficientSet",
    "TimeProfile",
    "generate_holder_field",
    "colored_coeffs",
    "psi_matrix",
    "parabolicity_margin",
    "evaluate_form",
    "ParabolicityReport",
    "freeze_coefficients",
    "recipe_to_coefficients",
    "coefficients_to_recipe",
    "unit_directions",
]

_FIELD_TAG = 0x5EED


def colored_coeffs(lattice: Lattice, decay: float, amplitude: float, seed: int) -> np.ndarray:
    """Hermitian random spectrum with |k|^(-decay) coloring.

    Per-mode complex Gaussians are keyed by the mode's integer coordinates,
    so refining K extends the field with new high modes instead of
    redrawing the old ones.  The Nyquist rows are left empty.  Returns a
    (*grid,) complex array.
    """
    key = _rng.derive_key(seed, _FIELD_TAG)
    k_axes = np.meshgrid(*([lattice.k1] * lattice.d), indexing="ij")
    labels = _rng.combine(*k_axes)
    z = _rng.normals(key, labels, salt=0) + 1j * _rng.normals(key, labels, salt=1)
    # z(-k): reverse every axis around the origin
    zneg = z
    for ax in range(lattice.d):
        zneg = np.roll(np.flip(zneg, axis=ax), 1, axis=ax)
    sym = 0.5 * (z + np.conj(zneg))
    weight = amplitude * np.maximum(lattice.kabs, 1.0) ** (-decay)
    c = sym * weight
    for ax in range(lattice.d):
        sl = [slice(None)] * lattice.d
        sl[ax] = lattice.K
        c[tuple(sl)] = 0.0
    return c


def generate_holder_field(
    lattice: Lattice,
    alpha: float,
    amplitude: float,
    seed: int,
    sup_cap: float | None = None,
) -> SpectralField:
    """Random real scalar field with Holder regularity alpha.

    Coefficient law c(k) ~ amplitude * |k|^(-(alpha + d/2 + 0.01)) * gaussian,
    symmetrized to a real field.  Same seed gives the identical field, and
    the K' > K field restricts to the K field on shared modes.  sup_cap,
    if given, rescales so the grid sup norm equals that value (no-op for a
    zero draw).
    """
    if alpha <= 0:
        raise ParameterError("holder field regularity alpha must be positive")
    decay = alpha + lattice.d / 2.0 + 0.01
    c = colored_coeffs(lattice, decay, amplitude, seed)
    f = SpectralField(lattice, c[None, None].copy())
    if sup_cap is not None:
        top = float(np.abs(idft(f)).max())
        if top > 0:
            f = f * (sup_cap / top)
    return f


class TimeProfile:
    """Scalar time profile rho(t) in [rho_min, rho_max], rho_min > 0."""

    def __init__(self, kind="constant", rho_min=1.0, rho_max=1.0, period=1.0):
        if kind not in ("constant", "cosine"):
            raise ParameterError("time profile kind must be 'constant' or 'cosine'")
        if not (0 < rho_min <= rho_max):
            raise ParameterError("time profile requires 0 < rho_min <= rho_max")
        if kind == "constant" and rho_min != rho_max:
            raise ParameterError("constant profile requires rho_min == rho_max")
        self.kind = kind
        self.rho_min = float(rho_min)
        self.rho_max = float(rho_max)
        self.period = float(period)

    def __call__(self, t):
        if self.kind == "constant":
            return self.rho_min
        mid = 0.5 * (self.rho_min + self.rho_max)
        amp = 0.5 * (self.rho_max - self.rho_min)
        return mid + amp * math.cos(2.0 * math.pi * t / self.period)

    def to_dict(self):
        d = {"kind": self.kind}
        if self.kind == "cosine":
            d.update(rho_min=self.rho_min, rho_max=self.rho_max, period=self.period)
        elif self.rho_min != 1.0:
            d.update(rho_min=self.rho_min, rho_max=self.rho_max)
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(**d) if d else cls()


class CoefficientSet:
    """Spatial coefficient fields plus regularity metadata.

    a_hat: (d, d, m, m, *grid) complex spectra of a^{i,j}_{k,h}
    b_hat: (d, m, n_noise, *grid) complex spectra of b^{j}_{k,n}
    alpha: Holder exponent certified for a and b (non-integer)
    beta:  extra Holder exponent for a when the non-divergence form is used
    """

    def __init__(
        self,
        lattice: Lattice,
        a_hat: np.ndarray,
        b_hat: np.ndarray,
        alpha: float,
        beta: float | None = None,
        c_ab: float | None = None,
        time_profile: TimeProfile | None = None,
        recipe: dict | None = None,
    ):
        d, m = lattice.d, a_hat.shape[2]
        if a_hat.shape != (d, d, m, m) + lattice.shape:
            raise ParameterError("a_hat shape must be (d, d, m, m, *grid)")
        if b_hat.ndim != 3 + lattice.d or b_hat.shape[0] != d or b_hat.shape[1] != m:
            raise ParameterError("b_hat shape must be (d, m, n_noise, *grid)")
        self.lattice = lattice
        self.m = m
        self.n_noise = b_hat.shape[2]
        self.a_hat = np.asarray(a_hat, dtype=np.complex128)
        self.b_hat = np.asarray(b_hat, dtype=np.complex128)
        self.alpha = float(alpha)
        self.beta = None if beta is None else float(beta)
        self.c_ab = None if c_ab is None else float(c_ab)
        self.time_profile = time_profile or TimeProfile()
        self.recipe = recipe
        self._caches: dict = {}

    # -- views -------------------------------------------------------------

    def a_field(self, i: int, j: int) -> SpectralField:
        """a^{i,j} as a field with m*m components (row-major over (k,h))."""
        c = self.a_hat[i, j].reshape((self.m * self.m, 1) + self.lattice.shape)
        return SpectralField(self.lattice, c.copy())

    def b_field(self, j: int) -> SpectralField:
        """b^{j} as an m-component field with the noise channel as l^2 index."""
        return SpectralField(self.lattice, self.b_hat[j].copy(), self.n_noise)

    def a_grid(self) -> np.ndarray:
        """Real part of a on the grid, (d, d, m, m, *grid) float."""
        if "a_grid" not in self._caches:
            flat = self.a_hat.reshape((-1, 1) + self.lattice.shape)
            vals = idft(SpectralField(self.lattice, flat.copy()))
            self._caches["a_grid"] = np.ascontiguousarray(
                vals[:, 0].real.reshape(self.a_hat.shape)
            )
        return self._caches["a_grid"]

    def b_grid(self) -> np.ndarray:
        if "b_grid" not in self._caches:
            flat = self.b_hat.reshape((-1, 1) + self.lattice.shape)
            vals = idft(SpectralField(self.lattice, flat.copy()))
            self._caches["b_grid"] = np.ascontiguousarray(
                vals[:, 0].real.reshape(self.b_hat.shape)
            )
        return self._caches["b_grid"]

    def a_padded(self) -> np.ndarray:
        """a evaluated on the dealiased grid (cached; used by the solver)."""
        if "a_pad" not in self._caches:
            self._caches["a_pad"] = _pad_values(self.a_hat, self.lattice)
        return self._caches["a_pad"]

    def b_padded(self) -> np.ndarray:
        if "b_pad" not in self._caches:
            self._caches["b_pad"] = _pad_values(self.b_hat, self.lattice)
        return self._caches["b_pad"]

    @property
    def is_constant(self) -> bool:
        if "const" not in self._caches:
            origin = (Ellipsis,) + (0,) * self.lattice.d
            tol = 1e-14

            def flat_without_origin(arr):
                mask = np.ones(self.lattice.shape, dtype=bool)
                mask[(0,) * self.lattice.d] = False
                return np.abs(arr[..., mask]).max() if arr.size else 0.0

            da = flat_without_origin(self.a_hat)
            db = flat_without_origin(self.b_hat) if self.b_hat.size else 0.0
            scale = max(np.abs(self.a_hat[origin]).max(), 1.0)
            self._caches["const"] = max(da, db) <= tol * scale
        return self._caches["const"]

    def measured_regularity(self) -> float:
        """max over i,j of ||a^{i,j}||_{C^alpha} plus the same for b in l^2."""
        worst = 0.0
        for i in range(self.lattice.d):
            for j in range(self.lattice.d):
                worst = max(worst, holder_norm(self.a_field(i, j), self.alpha))
        for j in range(self.lattice.d):
            if self.n_noise:
                worst = max(worst, holder_norm(self.b_field(j), self.alpha))
        return worst


# ---------------------------------------------------------------------------
# parabolicity


def psi_matrix(coeffs: CoefficientSet, i: int, j: int, t: float, x) -> np.ndarray:
    """The m x m diagonal correction Psi^{i,j}(t, x).

    Entry (l, l) is rho(t) * (1/2) sum_n b^j_{l,n}(x) b^i_{l,n}(x); the
    profile enters as rho because b carries sqrt(rho).
    """
    pt = np.asarray(x, dtype=np.float64).reshape(1, -1)
    bi = eval_at(coeffs.b_field(i), pt)[:, :, 0].real  # (m, n)
    bj = eval_at(coeffs.b_field(j), pt)[:, :, 0].real
    diag = 0.5 * np.sum(bj * bi, axis=1) * coeffs.time_profile(t)
    return np.diag(diag)


def unit_directions(dim: int, count: int) -> np.ndarray:
    """Deterministic direction sequence on the unit sphere, nested in count.

    The first min(count, dim) entries are the coordinate directions; the
    remainder come from a keyed Gaussian sequence, so any prefix of the
    sequence is a subset of every longer prefix.
    """
    if dim < 1 or count < 1:
        raise ParameterError("unit_directions requires dim >= 1 and count >= 1")
    out = []
    for i in range(min(dim, count)):
        e = np.zeros(dim)
        e[i] = 1.0
        out.append(e)
    extra = count - len(out)
    if extra > 0:
        labels = np.arange(extra)[:, None] * dim + np.arange(dim)[None, :]
        g = _rng.normals(0xD12EC7, labels)
        norms = np.linalg.norm(g, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        out.extend(list(g / norms))
    return np.stack(out)


def _van_der_corput(n: int) -> np.ndarray:
    """First n terms of the base-2 van der Corput sequence (nested prefixes)."""
    vals = np.empty(n)
    for i in range(n):
        v, denom, k = 0.0, 0.5, i + 1
        while k:
            v += denom * (k & 1)
            k >>= 1
            denom *= 0.5
        vals[i] = v
    return vals


def _time_samples(n_t: int, t_max: float) -> np.ndarray:
    if n_t <= 1:
        return np.array([0.0])
    base = np.concatenate([[0.0, t_max], t_max * _van_der_corput(max(n_t - 2, 0))])
    return base[:n_t]


def _spatial_samples(lattice: Lattice, n_x: int) -> np.ndarray:
    """First n_x grid points in a fixed hashed order (nested in n_x)."""
    total = lattice.n_modes
    n_x = min(n_x, total)
    order = np.argsort(_rng.combine(0xA110C, np.arange(total)), kind="stable")
    return lattice.grid_points()[order[:n_x]]


@dataclass
class ParabolicityReport:
    margin: float
    vartheta: float
    passed: bool
    witness: dict
    samples: dict
    spatial_min: float = dc_field(default=0.0)


def evaluate_form(coeffs: CoefficientSet, t: float, x, xi, eta) -> float:
    """The parabolicity form at one sample point (used to replay witnesses)."""
    xi = np.asarray(xi, dtype=np.float64)
    eta = np.asarray(eta, dtype=np.float64)
    pt = np.asarray(x, dtype=np.float64).reshape(1, -1)
    d, m = coeffs.lattice.d, coeffs.m
    a_flat = coeffs.a_hat.reshape((-1, 1) + coeffs.lattice.shape)
    a_here = (
        eval_at(SpectralField(coeffs.lattice, a_flat.copy()), pt)[:, 0, 0]
        .real.reshape(d, d, m, m)
    )
    total = 0.0
    for i in range(d):
        for j in range(d):
            mat = 0.5 * (a_here[i, j] + a_here[i, j].T) - psi_matrix(
                coeffs, i, j, 0.0, pt[0]
            ) / coeffs.time_profile(0.0)
            total += float(eta @ mat @ eta) * xi[i] * xi[j]
    return total * coeffs.time_profile(t)


def parabolicity_margin(
    coeffs: CoefficientSet,
    vartheta: float = 0.0,
    n_x: int = 128,
    n_t: int = 3,
    n_xi: int = 64,
    n_eta: int = 64,
    t_max: float = 1.0,
) -> ParabolicityReport:
    """Sampled infimum of the parabolicity form, with witness.

    The sample families are nested under refinement of any of the counts,
    so the reported margin is monotone non-increasing as sampling is
    refined.  The time profile factors out of the form, hence time only
    enters through rho(t) evaluated on the sampled times.
    """
    lat, d, m = coeffs.lattice, coeffs.lattice.d, coeffs.m
    pts = _spatial_samples(lat, n_x)
    # grid values of a_sym - Psi at the sampled points (grid points, so no
    # trigonometric evaluation is needed)
    idx = np.round((pts + 0.5) * lat.N).astype(int) % lat.N
    flat_idx = np.ravel_multi_index(idx.T, lat.shape)
    a = coeffs.a_grid().reshape(d, d, m, m, -1)[..., flat_idx]
    # explicit trailing size: -1 is ambiguous when n_noise == 0
    b = coeffs.b_grid().reshape(d, m, coeffs.n_noise, lat.n_modes)[..., flat_idx]
    a_sym = 0.5 * (a + a.transpose(0, 1, 3, 2, 4))
    psi = 0.5 * np.einsum("jlnx,ilnx->ijlx", b, b)
    form_mat = a_sym.copy()
    for l in range(m):
        form_mat[:, :, l, l, :] -= psi[:, :, l, :]
    xis = unit_directions(d, n_xi)
    etas = unit_directions(m, n_eta)
    # F(s, e, x) = sum_ij xi_i xi_j eta (a_sym - Psi) eta
    vals = np.einsum("si,sj,ijkhx,ek,eh->sex", xis, xis, form_mat, etas, etas)
    s_i, e_i, x_i = np.unravel_index(np.argmin(vals), vals.shape)
    spatial_min = float(vals[s_i, e_i, x_i])
    times = _time_samples(n_t, t_max)
    rhos = np.array([coeffs.time_profile(t) for t in times])
    t_i = int(np.argmin(rhos * spatial_min))
    margin = float(rhos[t_i] * spatial_min)
    witness = {
        "t": float(times[t_i]),
        "x": pts[x_i].tolist(),
        "xi": xis[s_i].tolist(),
        "eta": etas[e_i].tolist(),
    }
    # normalized sample directions carry ~1e-16 length error, so an exact
    # margin can land a few ulps below an analytic threshold
    tol = 1e-12 * max(1.0, abs(vartheta))
    return ParabolicityReport(
        margin=margin,
        vartheta=float(vartheta),
        passed=margin >= vartheta - tol,
        witness=witness,
        samples={"n_x": int(len(pts)), "n_t": int(n_t), "n_xi": int(n_xi), "n_eta": int(n_eta)},
        spatial_min=spatial_min,
    )


def freeze_coefficients(coeffs: CoefficientSet, y) -> CoefficientSet:
    """Replace every coefficient field by its value at the point y."""
    lat = coeffs.lattice
    pt = np.asarray(y, dtype=np.float64).reshape(1, -1)
    if pt.shape[1] != lat.d:
        raise ParameterError(f"freeze point must have {lat.d} coordinates")
    a_flat = coeffs.a_hat.reshape((-1, 1) + lat.shape)
    a_vals = eval_at(SpectralField(lat, a_flat.copy()), pt)[:, 0, 0].real.reshape(
        coeffs.a_hat.shape[:4]
    )
    a_hat = np.zeros_like(coeffs.a_hat)
    a_hat[(Ellipsis,) + (0,) * lat.d] = a_vals
    b_hat = np.zeros_like(coeffs.b_hat)
    if coeffs.n_noise:
        b_flat = coeffs.b_hat.reshape((-1, 1) + lat.shape)
        b_vals = eval_at(SpectralField(lat, b_flat.copy()), pt)[:, 0, 0].real.reshape(
            coeffs.b_hat.shape[:3]
        )
        b_hat[(Ellipsis,) + (0,) * lat.d] = b_vals
    return CoefficientSet(
        lat,
        a_hat,
        b_hat,
        alpha=coeffs.alpha,
        beta=coeffs.beta,
        c_ab=coeffs.c_ab,
        time_profile=coeffs.time_profile,
    )


# ---------------------------------------------------------------------------
# JSON recipes


def _build_entry_field(lattice, entry) -> SpectralField:
    f = constant_field(lattice, entry.get("constant", 0.0))
    pert = entry.get("perturbation")
    if pert:
        f = f + generate_holder_field(
            lattice,
            alpha=pert["smoothness"],
            amplitude=pert.get("amplitude", 1.0),
            seed=pert["seed"],
            sup_cap=pert.get("sup_cap"),
        )
    return f


def recipe_to_coefficients(recipe: dict) -> CoefficientSet:
    """Build a CoefficientSet from its JSON-serializable recipe.

    Schema (all entries optional except lattice/m/n_noise/alpha):

        {"lattice": {"d": 1, "K": 32}, "m": 1, "n_noise": 1,
         "alpha": 2.2, "beta": 2.2,
         "time_profile": {"kind": "constant"},
         "a": [{"i":0,"j":0,"k":0,"h":0,"constant":1.0,
                "perturbation": {"amplitude":0.2,"smoothness":2.2,
                                  "seed":7,"sup_cap":0.25}}],
         "b": [{"j":0,"k":0,"n":0,"constant":0.4, "perturbation": ...}]}

    Unlisted (i,j,k,h) entries of a and (j,k,n) entries of b are zero.
    """
    try:
        lat = Lattice(recipe["lattice"]["d"], recipe["lattice"]["K"])
        m = int(recipe.get("m", 1))
        n_noise = int(recipe.get("n_noise", 0))
        alpha = float(recipe["alpha"])
    except KeyError as exc:
        raise ParameterError(f"coefficient recipe missing key: {exc}") from exc
    d = lat.d
    a_hat = np.zeros((d, d, m, m) + lat.shape, dtype=np.complex128)
    b_hat = np.zeros((d, m, n_noise) + lat.shape, dtype=np.complex128)
    for entry in recipe.get("a", []):
        i, j = int(entry["i"]), int(entry["j"])
        k, h = int(entry.get("k", 0)), int(entry.get("h", 0))
        if not (0 <= i < d and 0 <= j < d and 0 <= k < m and 0 <= h < m):
            raise ParameterError(f"a entry indices out of range: {entry}")
        a_hat[i, j, k, h] = _build_entry_field(lat, entry).coeffs[0, 0]
    for entry in recipe.get("b", []):
        j, k, n = int(entry["j"]), int(entry.get("k", 0)), int(entry.get("n", 0))
        if not (0 <= j < d and 0 <= k < m and 0 <= n < n_noise):
            raise ParameterError(f"b entry indices out of range: {entry}")
        b_hat[j, k, n] = _build_entry_field(lat, entry).coeffs[0, 0]
    return CoefficientSet(
        lat,
        a_hat,
        b_hat,
        alpha=alpha,
        beta=recipe.get("beta"),
        c_ab=recipe.get("c_ab"),
        time_profile=TimeProfile.from_dict(recipe.get("time_profile")),
        recipe=recipe,
    )


def coefficients_to_recipe(coeffs: CoefficientSet) -> dict:
    """Serialize a recipe-built set back to its JSON document."""
    if coeffs.recipe is None:
        raise ParameterError(
            "only recipe-built coefficient sets are JSON serializable"
        )
    return json.loads(json.dumps(coeffs.recipe))
