"""A small maximal-regularity ratio experiment with report artifacts.

Monte Carlo paths of a stochastic heat equation with gradient noise are
solved, the weighted space-time norm of each solution is divided by the
norm of its data, and the per-path ratios are aggregated.  Bounded
ratios across refinement is the numerical counterpart of maximal
regularity.  Artifacts (CSV, JSON, SVG) land in demos/out/.
"""

import os

from smrlab import (
    GaussianDataSampler,
    NormSpec,
    TimeGrid,
    recipe_to_coefficients,
    report_summary,
    smr_experiment,
    write_json,
    write_report_csv,
    write_svg_chart,
)

recipe = {
    "lattice": {"d": 1, "K": 16},
    "m": 1,
    "n_noise": 1,
    "alpha": 2.2,
    "beta": 2.2,
    "a": [{"i": 0, "j": 0, "constant": 1.0}],
    "b": [{"j": 0, "k": 0, "n": 0, "constant": 0.5}],
}
spec = NormSpec(p=4, q=2, sigma=0.0, kappa=0.0)

reports = []
for level in range(3):
    scaled = {**recipe, "lattice": {"d": 1, "K": 16 * 2**level}}
    coeffs = recipe_to_coefficients(scaled)
    sampler = GaussianDataSampler(coeffs.lattice, n_noise=1, seed=4)
    rep = smr_experiment(
        coeffs,
        spec,
        sampler,
        n_paths=32,
        grid=TimeGrid(0.0, 0.5, 32 * 2**level),
        base_seed=9,
        vartheta=0.5,
        experiment_id=f"demo-K{16 * 2**level}",
    )
    reports.append(rep)
    print(f"K={rep.K:3d} M={rep.M:4d} margin={rep.margin:.3f} "
          f"ratio={rep.ratio:.5f} p95={rep.ratio_p95:.5f}")

out = os.path.join(os.path.dirname(os.path.abspath(__file__)), "out")
os.makedirs(out, exist_ok=True)
with open(os.path.join(out, "demo_report.csv"), "w") as fh:
    write_report_csv(reports, fh)
with open(os.path.join(out, "demo_summary.json"), "w") as fh:
    write_json(report_summary(reports), fh)
with open(os.path.join(out, "demo_ratio.svg"), "w") as fh:
    write_svg_chart(
        [("ratio", list(range(3)), [r.ratio for r in reports]),
         ("p95", list(range(3)), [r.ratio_p95 for r in reports])],
        fh, title="ratio vs refinement", xlabel="level", ylabel="ratio")
print("artifacts written to", out)
