"""Weighted space-time norms, the data functional, Monte Carlo
regularity-ratio experiments, and perturbation smallness bookkeeping."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._rng import derive_key
from .coefficients import CoefficientSet, colored_coeffs, parabolicity_margin
from .errors import ParameterError
from .solver import (
    OperatorForm,
    SamplePath,
    TimeGrid,
    graded_exponent,
    solve_path,
    stabilization_nu,
)
from .spectral import Lattice, SpectralField, besov_norm, bessel_norm

__all__ = [
    "NormSpec",
    "weighted_time_norm",
    "trace_sup_norm",
    "data_functional",
    "GaussianDataSampler",
    "PathRow",
    "RatioReport",
    "smr_experiment",
    "perturbation_budget",
]


@dataclass(frozen=True)
class NormSpec:
    """Exponents of the weighted solution space and its data functional.

    The admissible region is q in [2, inf) with either p in (2, inf) and
    kappa in [0, p/2 - 1), or p = q = 2 with kappa = 0.  theta selects
    the time norm: 0 for the weighted L^p norm, "sup" for the
    continuous-in-time trace norm.
    """

    p: float
    q: float
    sigma: float
    kappa: float = 0.0
    theta: float | str = 0.0

    def __post_init__(self):
        if not 2.0 <= self.q < np.inf:
            raise ParameterError("q must lie in [2, inf)")
        if self.p == 2.0:
            if self.q != 2.0:
                raise ParameterError("p = 2 requires q = 2")
            if self.kappa != 0.0:
                raise ParameterError("p = 2 requires kappa = 0")
        elif 2.0 < self.p < np.inf:
            if not 0.0 <= self.kappa < 0.5 * self.p - 1.0:
                raise ParameterError("kappa must lie in [0, p/2 - 1)")
        else:
            raise ParameterError("p must lie in [2, inf)")
        if self.theta not in (0, 0.0, "sup"):
            raise ParameterError("theta must be 0 or 'sup'")

    @property
    def trace_smoothness(self) -> float:
        """Smoothness of the admissible initial-data space."""
        return 2.0 + self.sigma - 2.0 * (1.0 + self.kappa) / self.p

    @property
    def grading(self) -> float:
        return graded_exponent(self.p, self.kappa)


def _weight_cells(nodes: np.ndarray, s: float, kappa: float) -> np.ndarray:
    """Exact integral of the weight (t - s)^kappa over each grid cell."""
    e = kappa + 1.0
    prim = np.maximum(nodes - s, 0.0) ** e / e
    return np.diff(prim)


def weighted_time_norm(
    path: SamplePath, spec: NormSpec, spatial_s: float, t_end: float | None = None
) -> float:
    """Weighted L^p-in-time norm of a trajectory in H^{spatial_s, q}.

    Computes (sum over cells of w-integral times the endpoint average of
    the norm^p)^(1/p) with the cell integral of (t - s)^kappa carried
    out in closed form, so constants in time come out exactly.  t_end
    truncates the integration to nodes at or below it.
    """
    nodes = path.grid.nodes
    stop = len(nodes)
    if t_end is not None:
        stop = int(np.searchsorted(nodes, t_end + 1e-12))
        if stop < 2:
            return 0.0
    vals = np.array(
        [bessel_norm(path.field(j), spatial_s, spec.q) ** spec.p for j in range(stop)]
    )
    w = _weight_cells(nodes[:stop], path.grid.s, spec.kappa)
    return float(np.sum(w * 0.5 * (vals[:-1] + vals[1:])) ** (1.0 / spec.p))


def trace_sup_norm(path: SamplePath, spec: NormSpec, eps: float | None = None) -> float:
    """Sup over late nodes of the trace-space norm of the solution.

    For p > 2 this is the largest Besov norm with smoothness
    2 + sigma - 2/p over nodes t >= s + eps (eps defaults to a tenth of
    the interval); for p = 2 the full interval is used with the
    H^{1+sigma,2} norm.
    """
    grid = path.grid
    if spec.p == 2.0:
        lo = grid.s
    else:
        if eps is None:
            eps = 0.1 * (grid.T - grid.s)
        if not 0 <= eps < grid.T - grid.s:
            raise ParameterError("eps must lie in [0, T - s)")
        lo = grid.s + eps
    best = 0.0
    for j, t in enumerate(grid.nodes):
        if t < lo - 1e-12:
            continue
        u = path.field(j)
        if spec.p == 2.0:
            n = bessel_norm(u, 1.0 + spec.sigma, 2.0)
        else:
            n = besov_norm(u, 2.0 + spec.sigma - 2.0 / spec.p, spec.q, spec.p)
        best = max(best, n)
    return best


def _data_time_norm(data, spec: NormSpec, grid: TimeGrid, spatial_s: float) -> float:
    """Weighted time norm of a data term: None, a constant field, or t -> field."""
    if data is None:
        return 0.0
    p, kappa = spec.p, spec.kappa
    w = _weight_cells(grid.nodes, grid.s, kappa)
    if isinstance(data, SpectralField):
        return bessel_norm(data, spatial_s, spec.q) * float(np.sum(w) ** (1.0 / p))
    vals = np.array([bessel_norm(data(t), spatial_s, spec.q) ** p for t in grid.nodes])
    return float(np.sum(w * 0.5 * (vals[:-1] + vals[1:])) ** (1.0 / p))


def data_functional(u0, f, g, spec: NormSpec, grid: TimeGrid) -> float:
    """The data functional: trace norm of u0 plus weighted norms of f and g.

    u0 is measured in the Besov space with the trace smoothness
    2 + sigma - 2(1+kappa)/p (for p = q = 2 in H^{1+sigma,2} instead),
    f in H^{sigma,q} and g in H^{1+sigma,q} with its l^2 axis, both with
    the power weight in time.  Any entry may be None for zero.
    """
    tr = 0.0
    if u0 is not None:
        if spec.p == 2.0:
            tr = bessel_norm(u0, 1.0 + spec.sigma, 2.0)
        else:
            tr = besov_norm(u0, spec.trace_smoothness, spec.q, spec.p)
    fn = _data_time_norm(f, spec, grid, spec.sigma)
    gn = _data_time_norm(g, spec, grid, 1.0 + spec.sigma)
    return float(tr + fn + gn)


class GaussianDataSampler:
    """Per-path random data (u0, f, g) as spectrally colored Gaussian fields.

    Field coefficients decay like |k|^(-decay); the noise channels of g
    are damped by (n+1)^(-2) so the l^2 norm stays finite.  Everything
    is keyed by (seed, path index), so path i always receives the same
    data regardless of execution order, and refining the lattice extends
    the fields instead of resampling them.
    """

    def __init__(
        self,
        lattice: Lattice,
        m: int = 1,
        n_noise: int = 1,
        seed: int = 0,
        u0_decay: float = 3.0,
        f_decay: float = 2.0,
        g_decay: float = 2.0,
        u0_amplitude: float = 1.0,
        f_amplitude: float = 1.0,
        g_amplitude: float = 1.0,
    ):
        self.lattice = lattice
        self.m = m
        self.n_noise = n_noise
        self.seed = seed
        self.u0_decay, self.f_decay, self.g_decay = u0_decay, f_decay, g_decay
        self.u0_amplitude, self.f_amplitude, self.g_amplitude = (
            u0_amplitude,
            f_amplitude,
            g_amplitude,
        )

    def _field(self, path_index, tag, decay, amplitude, n_seq):
        rows = []
        for comp in range(self.m):
            chans = []
            for n in range(max(n_seq, 1)):
                key = derive_key(self.seed, path_index, tag, comp, n)
                chans.append(colored_coeffs(self.lattice, decay, amplitude / (n + 1) ** 2, key))
            rows.append(chans)
        return SpectralField(self.lattice, np.array(rows), n_seq)

    def __call__(self, path_index: int):
        u0 = self._field(path_index, 1, self.u0_decay, self.u0_amplitude, 0)
        f = self._field(path_index, 2, self.f_decay, self.f_amplitude, 0)
        g = self._field(path_index, 3, self.g_decay, self.g_amplitude, self.n_noise)
        return u0, f, g


@dataclass(frozen=True)
class PathRow:
    """Per-path summary used for reports."""

    path_id: int
    J: float
    sol_norm: float
    ratio: float
    sup_norm: float


@dataclass(frozen=True)
class RatioReport:
    """Monte Carlo estimate of the regularity ratio with its provenance."""

    experiment_id: str
    spec: NormSpec
    K: int
    M: int
    n_noise: int
    n_paths: int
    margin: float
    compliant: bool
    J: float
    sol_norm: float
    ratio: float
    ratio_p95: float
    sup_norm: float
    rows: tuple[PathRow, ...]


def _p_mean(values: np.ndarray, p: float) -> float:
    return float(np.mean(values**p) ** (1.0 / p))


def smr_experiment(
    coeffs: CoefficientSet,
    spec: NormSpec,
    sampler,
    n_paths: int,
    grid: TimeGrid,
    form: OperatorForm = OperatorForm.DIVERGENCE,
    base_seed: int = 0,
    vartheta: float | None = None,
    sup_eps: float | None = None,
    threads: int | None = None,
    experiment_id: str = "experiment",
) -> RatioReport:
    """Estimate the solution-to-data ratio over Monte Carlo paths.

    Per path: solve with data from sampler(path_index), then form the
    weighted H^{2+sigma,q} norm of the trajectory, the data functional,
    and their ratio.  Expectations aggregate as the mean of p-th powers
    followed by the p-th root.  The coercivity margin of the coefficients
    is recorded; if vartheta is given the report is flagged compliant
    only when the margin reaches it.  Threads, if any, only parallelize
    the path loop; paths are keyed by index, so the report is identical
    for any thread count.
    """
    if n_paths < 1:
        raise ParameterError("n_paths must be at least 1")
    margin_report = parabolicity_margin(coeffs, vartheta if vartheta is not None else 0.0)
    compliant = vartheta is None or margin_report.margin >= vartheta
    nu = stabilization_nu(coeffs)

    def one(i: int) -> PathRow:
        u0, f, g = sampler(i)
        path = solve_path(
            coeffs, form, grid, u0, f=f, g=g, base_seed=base_seed, path_index=i, nu=nu
        )
        sol = weighted_time_norm(path, spec, 2.0 + spec.sigma)
        J = data_functional(u0, f, g, spec, grid)
        sup = trace_sup_norm(path, spec, sup_eps)
        return PathRow(i, J, sol, sol / J if J > 0 else 0.0, sup)

    if threads is not None and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            rows = list(ex.map(one, range(n_paths)))
    else:
        rows = [one(i) for i in range(n_paths)]
    rows.sort(key=lambda r: r.path_id)

    p = spec.p
    Js = np.array([r.J for r in rows])
    sols = np.array([r.sol_norm for r in rows])
    ratios = np.array([r.ratio for r in rows])
    sups = np.array([r.sup_norm for r in rows])
    J_agg = _p_mean(Js, p)
    sol_agg = _p_mean(sols, p)
    return RatioReport(
        experiment_id=experiment_id,
        spec=spec,
        K=coeffs.lattice.K,
        M=grid.M,
        n_noise=coeffs.n_noise,
        n_paths=n_paths,
        margin=margin_report.margin,
        compliant=compliant,
        J=J_agg,
        sol_norm=sol_agg,
        ratio=sol_agg / J_agg if J_agg > 0 else 0.0,
        ratio_p95=float(np.percentile(ratios, 95)),
        sup_norm=_p_mean(sups, p),
        rows=tuple(rows),
    )


def perturbation_budget(
    C_det: float,
    C_sto: float,
    C_A: float,
    C_B: float,
    L_A: float = 0.0,
    L_B: float = 0.0,
    eps: float = 0.5,
) -> dict:
    """Smallness bookkeeping for first-order perturbations of the operators.

    The perturbation is absorbable when C_det*C_A + C_sto*C_B < eps, with
    remaining margin eta = 1 - C_det*C_A - C_sto*C_B.  The lower-order
    constants L_A, L_B do not enter the smallness test; they are echoed
    for the record.
    """
    for name, v in (
        ("C_det", C_det),
        ("C_sto", C_sto),
        ("C_A", C_A),
        ("C_B", C_B),
        ("L_A", L_A),
        ("L_B", L_B),
    ):
        if v < 0:
            raise ParameterError(f"{name} must be nonnegative")
    if not 0.0 < eps < 1.0:
        raise ParameterError("eps must lie in (0, 1)")
    total = C_det * C_A + C_sto * C_B
    return {
        "pass": bool(total < eps),
        "eta": 1.0 - total,
        "sum": total,
        "eps": eps,
        "L_A": L_A,
        "L_B": L_B,
    }
