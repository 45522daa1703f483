"""Bony paraproducts, multiplication-inequality probes, ball extension,
coverings with partitions of unity, and the operator-cutoff commutator."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .coefficients import CoefficientSet
from .errors import LatticeMismatchError, ParameterError
from .solver import OperatorForm, apply_A
from .spectral import (
    Lattice,
    SpectralField,
    bessel_norm,
    dft,
    eval_at,
    holder_norm,
    lp_blocks,
    lq_norm,
    multiply,
    partition_for,
    smoothstep5,
)

__all__ = [
    "BonyTriple",
    "bony_decompose",
    "ProbeResult",
    "probe_multiplication",
    "extension_operator",
    "Cover",
    "build_cover",
    "PartitionOfUnity",
    "partition_of_unity",
    "CommutatorResult",
    "commutator_probe",
]


# ---------------------------------------------------------------------------
# Bony decomposition


@dataclass(frozen=True)
class BonyTriple:
    """The three pieces of the product split fg = T_fg + R_fg + T_gf.

    T_fg collects pairs where f sits at much lower frequency than g,
    T_gf the mirror image, and R_fg the diagonal pairs at most four
    dyadic blocks apart.  The three sum back to the dealiased product.
    """

    T_fg: SpectralField
    R_fg: SpectralField
    T_gf: SpectralField

    def reconstruct(self) -> SpectralField:
        return self.T_fg + self.R_fg + self.T_gf


def _block_field(dec, window) -> SpectralField:
    coeffs = np.tensordot(window, dec.blocks, axes=(0, 0))
    return SpectralField(dec.lattice, coeffs, dec.n_seq)


def bony_decompose(f: SpectralField, g: SpectralField) -> BonyTriple:
    """Split the pointwise product of two fields into paraproducts.

    With dyadic blocks D_j = psi_j(D) and low passes S_k = Psi_k(D):
    T_fg sums S_{k-5} f * D_k g over k >= 5, T_gf the same with roles
    swapped, and R_fg sums D_j f * D_k g over |j - k| <= 4.  Every
    (j, k) block pair lands in exactly one piece, so the sum equals the
    full dealiased product to roundoff.  One factor must be scalar; the
    other may carry components or an l^2 axis.
    """
    if f.lattice != g.lattice:
        raise LatticeMismatchError("factors live on different lattices")
    part = partition_for(f.lattice)
    J = part.j_top
    fdec = lp_blocks(f, part)
    gdec = lp_blocks(g, part)
    eye = np.eye(J + 1)
    low = np.tril(np.ones((J + 1, J + 1)))  # low[k] selects blocks j <= k

    def para(adec, bdec):
        # sum_{k>=5} (S_{k-5} a) (D_k b)
        total = None
        for k in range(5, J + 1):
            term = multiply(_block_field(adec, low[k - 5]), _block_field(bdec, eye[k]))
            total = term if total is None else total + term
        return total

    def remainder():
        total = None
        for k in range(J + 1):
            window = low[min(k + 4, J)].copy()
            if k >= 5:
                window -= low[k - 5]
            term = multiply(_block_field(fdec, window), _block_field(gdec, eye[k]))
            total = term if total is None else total + term
        return total

    R = remainder()
    zero = R * 0.0
    T_fg = para(fdec, gdec)
    T_gf = para(gdec, fdec)
    return BonyTriple(
        T_fg if T_fg is not None else zero,
        R,
        T_gf if T_gf is not None else zero,
    )


# ---------------------------------------------------------------------------
# multiplication inequality probes


@dataclass(frozen=True)
class ProbeResult:
    """Ratio LHS/RHS of one product estimate, with the epsilon used (if any)."""

    case: str
    ratio: float
    lhs: float
    rhs: float
    eps: float | None = None


def _require(cond: bool, msg: str):
    if not cond:
        raise ParameterError(msg)


def _get(params, name):
    if name not in params:
        raise ParameterError(f"probe case needs parameter '{name}'")
    return float(params[name])


def probe_multiplication(case: str, f: SpectralField, g: SpectralField, params: dict) -> ProbeResult:
    """Evaluate one pointwise-multiplication estimate as a ratio LHS/RHS.

    Cases, with s > 0 and q in (1, inf) throughout:
      P1:  |fg|_{H^{s,q}} vs |f|_{H^{s,q1}}|g|_{L^{q2}} + |g|_{H^{s,r1}}|f|_{L^{r2}}
           with 1/q1 + 1/q2 = 1/r1 + 1/r2 = 1/q (defaults q1=r1=q, q2=r2=inf).
      P2:  |fg|_{H^{s,q}} vs |f|_{H^{s,q}}|g|_inf + |g|_{C^tau}|f|_{L^q}, tau > s.
      P3:  |fg|_{H^{-s,q}} vs |f|_{H^{-s,q}}|g|_inf + |g|_{H^{tau,zeta}}|f|_{H^{-s-eps,q}}
           with tau > d/zeta, zeta >= q/(q-1); eps = (tau-s)/2 when zeta >= d/s,
           else eps = tau - d/zeta.
      P4:  as P3 with |g|_{C^tau} and eps = (tau-s)/2, tau > s.
      COR: |fg|_{H^{s,q}} vs |f|_{H^{s,q}}|g|_inf + |f|_{H^{s-eps,q}}|g|_{H^{eta,xi}}
           with xi in (1, q], eta >= s, eta > d/xi, eta - d/xi >= s - d/q;
           eps = (s - d/q)/2 when s > d/q, else eps = min(s, eta - d/xi)/2.

    A zero right-hand side forces a zero left-hand side, so the ratio is
    0 by convention and never NaN.
    """
    if f.lattice != g.lattice:
        raise LatticeMismatchError("factors live on different lattices")
    d = f.lattice.d
    s = _get(params, "s")
    q = _get(params, "q")
    _require(s > 0, "s must be positive")
    _require(1.0 < q < np.inf, "q must lie in (1, inf)")
    eps = None

    if case == "P1":
        q1 = float(params.get("q1", q))
        r1 = float(params.get("r1", q))
        q2 = float(params.get("q2", np.inf))
        r2 = float(params.get("r2", np.inf))
        _require(1.0 < q1 < np.inf and 1.0 < r1 < np.inf, "q1, r1 must lie in (1, inf)")
        _require(q2 > 1.0 and r2 > 1.0, "q2, r2 must lie in (1, inf]")
        inv = lambda e: 0.0 if e == np.inf else 1.0 / e
        _require(abs(inv(q1) + inv(q2) - 1.0 / q) < 1e-12, "1/q1 + 1/q2 must equal 1/q")
        _require(abs(inv(r1) + inv(r2) - 1.0 / q) < 1e-12, "1/r1 + 1/r2 must equal 1/q")
        lhs = bessel_norm(multiply(f, g), s, q)
        rhs = bessel_norm(f, s, q1) * lq_norm(g, q2) + bessel_norm(g, s, r1) * lq_norm(f, r2)
    elif case == "P2":
        tau = _get(params, "tau")
        _require(tau > s, "tau must exceed s")
        lhs = bessel_norm(multiply(f, g), s, q)
        rhs = bessel_norm(f, s, q) * lq_norm(g, np.inf) + holder_norm(g, tau) * lq_norm(f, q)
    elif case == "P3":
        tau = _get(params, "tau")
        zeta = _get(params, "zeta")
        _require(tau > s, "tau must exceed s")
        qprime = q / (q - 1.0)
        _require(qprime <= zeta < np.inf, "zeta must lie in [q/(q-1), inf)")
        _require(tau > d / zeta, "tau must exceed d/zeta")
        eps = 0.5 * (tau - s) if zeta >= d / s else tau - d / zeta
        lhs = bessel_norm(multiply(f, g), -s, q)
        rhs = bessel_norm(f, -s, q) * lq_norm(g, np.inf) + bessel_norm(g, tau, zeta) * bessel_norm(
            f, -s - eps, q
        )
    elif case == "P4":
        tau = _get(params, "tau")
        _require(tau > s, "tau must exceed s")
        eps = 0.5 * (tau - s)
        lhs = bessel_norm(multiply(f, g), -s, q)
        rhs = bessel_norm(f, -s, q) * lq_norm(g, np.inf) + holder_norm(g, tau) * bessel_norm(
            f, -s - eps, q
        )
    elif case == "COR":
        xi = _get(params, "xi")
        eta = _get(params, "eta")
        _require(1.0 < xi <= q, "xi must lie in (1, q]")
        _require(eta >= s, "eta must be at least s")
        _require(eta > d / xi, "eta must exceed d/xi")
        _require(eta - d / xi >= s - d / q - 1e-12, "eta - d/xi must be at least s - d/q")
        gap = s - d / q
        eps = 0.5 * gap if gap > 0 else 0.5 * min(s, eta - d / xi)
        lhs = bessel_norm(multiply(f, g), s, q)
        rhs = bessel_norm(f, s, q) * lq_norm(g, np.inf) + bessel_norm(f, s - eps, q) * bessel_norm(
            g, eta, xi
        )
    else:
        raise ParameterError("case must be one of P1, P2, P3, P4, COR")

    ratio = 0.0 if rhs == 0.0 else lhs / rhs
    return ProbeResult(case, float(ratio), float(lhs), float(rhs), eps)


# ---------------------------------------------------------------------------
# extension from a ball to the torus


def extension_operator(
    f: SpectralField | Callable[[np.ndarray], np.ndarray],
    y,
    r: float,
    lattice: Lattice | None = None,
) -> SpectralField:
    """Extend scalar data given on the ball B(y, r) to the whole torus.

    In the unit coordinate t = dist(x, y)/r the value is f itself for
    t <= 1, the radial reflection f at distance 2r - dist for 1 < t < 2
    blended with the center value f(y) by a quintic cutoff, and exactly
    f(y) for t >= 2.  Every sample lies in the closed ball, so the
    output depends only on the restriction of f there; the result is a
    convex combination of ball values, so the sup never grows.  Accepts
    a scalar field (sampled spectrally) or a callable on point arrays.
    """
    _require(0.0 < r < 0.125, "radius must lie in (0, 1/8)")
    if isinstance(f, SpectralField):
        if f.m != 1 or f.coeffs.shape[1] != 1:
            raise ParameterError("extension operates on scalar fields")
        if lattice is None:
            lattice = f.lattice
        sample = lambda pts: eval_at(f, pts)[0, 0]
    else:
        if lattice is None:
            raise ParameterError("a lattice is required with callable input")
        sample = lambda pts: np.asarray(f(pts), dtype=np.complex128)
    y = np.broadcast_to(np.asarray(y, dtype=np.float64).ravel(), (lattice.d,))

    pts = lattice.grid_points()
    z = (pts - y + 0.5) % 1.0 - 0.5
    rho = np.sqrt(np.sum(z * z, axis=1))
    # target distance from the center: identity inside, reflected outside
    rho_s = np.where(rho <= r, rho, np.maximum(2.0 * r - rho, 0.0))
    scale = np.divide(rho_s, rho, out=np.ones_like(rho), where=rho > 0)
    blend = 1.0 - smoothstep5(rho / r - 1.0)
    vals = blend * sample(y + z * scale[:, None])
    vals += (1.0 - blend) * sample(y[None, :])[0]
    return dft(vals.reshape(lattice.shape), lattice)


# ---------------------------------------------------------------------------
# coverings and partitions of unity


@dataclass(frozen=True)
class Cover:
    """Finitely many balls of one radius whose union is the torus."""

    centers: np.ndarray  # (count, d)
    radius: float

    def __post_init__(self):
        c = np.asarray(self.centers, dtype=np.float64)
        if c.ndim != 2 or len(c) == 0:
            raise ParameterError("centers must be a nonempty (count, d) array")
        if not self.radius > 0:
            raise ParameterError("radius must be positive")
        object.__setattr__(self, "centers", c)

    @property
    def count(self) -> int:
        return len(self.centers)

    @property
    def d(self) -> int:
        return self.centers.shape[1]


def _covered(cover: Cover, pts: np.ndarray) -> bool:
    acc = 0.0
    for a in range(cover.d):
        diff = (pts[:, a, None] - cover.centers[None, :, a] + 0.5) % 1.0 - 0.5
        acc = acc + diff * diff
    d2 = acc.min(axis=1)
    return bool((d2 <= cover.radius**2 + 1e-15).all())


def build_cover(
    eta: float,
    alpha: float,
    c_ab: float,
    c_norm: float,
    d: int = 1,
    lattice: Lattice | None = None,
) -> Cover:
    """Cover the torus by balls of radius min((eta/(c_norm c_ab))^(1/alpha), 1/8).

    The radius makes the coefficient oscillation within one ball at most
    eta for alpha-Holder coefficients with seminorm c_ab, against the
    norm constant c_norm; it is capped at 1/8.  Centers sit on a uniform
    lattice of spacing 1/ceil(1/r), so the nearest center is within
    r sqrt(d)/2 < r of any point for d <= 3.  If a lattice is passed its
    grid points are checked for membership.
    """
    for name, v in (("eta", eta), ("alpha", alpha), ("c_ab", c_ab), ("c_norm", c_norm)):
        _require(v > 0, f"{name} must be positive")
    if lattice is not None:
        d = lattice.d
    _require(d >= 1, "d must be at least 1")
    r = min((eta / (c_norm * c_ab)) ** (1.0 / alpha), 0.125)
    n = math.ceil(1.0 / r)
    axis = -0.5 + np.arange(n) / n
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    centers = np.stack([m.ravel() for m in mesh], axis=-1)
    cover = Cover(centers, r)
    if lattice is not None and not _covered(cover, lattice.grid_points()):
        raise ParameterError("constructed balls do not cover the lattice grid")
    return cover


@dataclass(frozen=True)
class PartitionOfUnity:
    """Smooth bumps subordinate to a cover that sum to one on the grid."""

    cover: Cover
    bumps: tuple[SpectralField, ...]

    def total(self) -> SpectralField:
        out = self.bumps[0]
        for b in self.bumps[1:]:
            out = out + b
        return out


def partition_of_unity(cover: Cover, lattice: Lattice) -> PartitionOfUnity:
    """Normalized bump functions subordinate to the cover's balls.

    Each raw bump is exp(1 - 1/(1 - t^2)) in the scaled distance
    t = dist(x, y)/r, identically zero for t >= 1, so its support stays
    inside the ball.  Dividing by the total makes the family sum to one
    exactly at every grid point; the total must be positive, which is a
    grid-level coverage check.
    """
    if lattice.d != cover.d:
        raise ParameterError("cover and lattice dimensions differ")
    pts = lattice.grid_points()
    raw = np.zeros((cover.count, len(pts)))
    for lam, y in enumerate(cover.centers):
        z = (pts - y + 0.5) % 1.0 - 0.5
        t2 = np.sum(z * z, axis=1) / cover.radius**2
        inside = t2 < 1.0 - 1e-12
        raw[lam, inside] = np.exp(1.0 - 1.0 / (1.0 - t2[inside]))
    total = raw.sum(axis=0)
    _require(bool((total > 0).all()), "balls do not cover the grid")
    bumps = tuple(dft((row / total).reshape(lattice.shape), lattice) for row in raw)
    return PartitionOfUnity(cover, bumps)


# ---------------------------------------------------------------------------
# operator-cutoff commutator


class CommutatorResult(NamedTuple):
    norm_commutator: float
    norm_lower: float
    eps: float


def commutator_probe(
    coeffs: CoefficientSet,
    phi: SpectralField,
    u: SpectralField,
    sigma: float,
    q: float,
    form: OperatorForm = OperatorForm.DIVERGENCE,
    t: float = 0.0,
) -> CommutatorResult:
    """Measure the commutator of the second-order operator with a cutoff.

    Returns (|A(phi u) - phi A u|_{H^{sigma,q}}, |u|_{H^{2+sigma-eps,q}}, eps).
    The commutator drops one order, so it should be controlled by the
    lower, eps-weakened norm of u.  For sigma <= -1 feasibility needs
    alpha > -sigma - 1 and eps = min(1, alpha + sigma + 1)/2; for
    sigma > -1, eps = min(1 + sigma, 1)/2.
    """
    if phi.lattice != u.lattice or phi.lattice != coeffs.lattice:
        raise LatticeMismatchError("coefficients, cutoff and field must share a lattice")
    if phi.m != 1 or phi.coeffs.shape[1] != 1:
        raise ParameterError("cutoff must be a scalar field")
    _require(1.0 < q < np.inf, "q must lie in (1, inf)")
    if sigma <= -1.0:
        slack = coeffs.alpha + sigma + 1.0
        _require(slack > 0, "commutator probe needs alpha > -sigma - 1")
        eps = 0.5 * min(1.0, slack)
    else:
        eps = 0.5 * min(1.0 + sigma, 1.0)
    Au = apply_A(coeffs, form, t, u)
    comm = apply_A(coeffs, form, t, multiply(phi, u)) - multiply(phi, Au)
    return CommutatorResult(
        bessel_norm(comm, sigma, q),
        bessel_norm(u, 2.0 + sigma - eps, q),
        eps,
    )
