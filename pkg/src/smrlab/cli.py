"""Configuration-driven command line front end.

One JSON config per invocation; the "subcommand" key selects the
experiment.  Artifacts (JSON, CSV, SVG, binary trajectories) land in
the output directory.  Exit codes: 0 success, 2 validation failure,
3 numerical blow-up.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from ._rng import derive_key
from .coefficients import parabolicity_margin, recipe_to_coefficients
from .errors import BlowUpError, LatticeMismatchError, ParameterError
from .harness import GaussianDataSampler, NormSpec, perturbation_budget, smr_experiment
from .paraproduct import probe_multiplication
from .report import (
    SCHEMA_VERSION,
    report_summary,
    write_json,
    write_report_csv,
    write_svg_chart,
)
from .solver import OperatorForm, TimeGrid, dump_trajectory, solve_path
from .spectral import (
    Lattice,
    SpectralField,
    bessel_norm,
    besov_norm,
    holder_norm,
    lq_norm,
)
from .coefficients import generate_holder_field

__all__ = ["main", "entrypoint"]

_SAMPLER_KEYS = {
    "seed",
    "u0_decay",
    "f_decay",
    "g_decay",
    "u0_amplitude",
    "f_amplitude",
    "g_amplitude",
}


def _require(cond: bool, msg: str):
    if not cond:
        raise ParameterError(msg)


def _cfg_get(cfg: dict, key: str):
    if key not in cfg:
        raise ParameterError(f"config is missing required key '{key}'")
    return cfg[key]


def _exponent(v) -> float:
    if isinstance(v, str):
        if v.lower() in ("inf", "infinity"):
            return np.inf
        raise ParameterError(f"bad exponent value '{v}'")
    return float(v)


def _resolve(path: str, base: str) -> str:
    return path if os.path.isabs(path) else os.path.join(base, path)


def _coeffs_from_config(cfg: dict, base_dir: str):
    spec = _cfg_get(cfg, "coefficients")
    if isinstance(spec, str):
        with open(_resolve(spec, base_dir)) as fh:
            spec = json.load(fh)
    if not isinstance(spec, dict):
        raise ParameterError("coefficients must be a recipe object or a file path")
    return recipe_to_coefficients(spec)


def _form_from_config(cfg: dict) -> OperatorForm:
    name = cfg.get("form", "divergence")
    try:
        return OperatorForm[name.upper()]
    except KeyError:
        raise ParameterError("form must be 'divergence' or 'nondivergence'") from None


def _spec_from_config(cfg: dict) -> NormSpec:
    raw = _cfg_get(cfg, "spec")
    for key in ("p", "q", "sigma", "kappa"):
        _require(key in raw, f"spec must set '{key}' explicitly")
    return NormSpec(
        p=float(raw["p"]),
        q=float(raw["q"]),
        sigma=float(raw["sigma"]),
        kappa=float(raw["kappa"]),
        theta=raw.get("theta", 0.0),
    )


def _grid_from_config(cfg: dict, spec: NormSpec | None = None) -> TimeGrid:
    raw = _cfg_get(cfg, "grid")
    gamma = 1.0
    if "gamma" in raw:
        gamma = float(raw["gamma"])
    elif raw.get("graded") and spec is not None:
        gamma = spec.grading
    return TimeGrid(float(raw.get("s", 0.0)), float(_cfg_get(raw, "T")), int(_cfg_get(raw, "M")), gamma)


def _sampler_from_config(cfg: dict, lattice, m: int, n_noise: int) -> GaussianDataSampler:
    raw = dict(cfg.get("data", {}))
    for key in raw:
        _require(key in _SAMPLER_KEYS, f"unknown data key '{key}'")
    return GaussianDataSampler(lattice, m=m, n_noise=n_noise, **raw)


def _out(args, name: str) -> str:
    os.makedirs(args.out_dir, exist_ok=True)
    return os.path.join(args.out_dir, name)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_check_parabolicity(cfg, args, base_dir) -> int:
    coeffs = _coeffs_from_config(cfg, base_dir)
    vartheta = float(cfg.get("vartheta", 0.0))
    sampling = cfg.get("sampling", {})
    for key in sampling:
        _require(key in ("n_x", "n_t", "n_xi", "n_eta", "t_max"), f"unknown sampling key '{key}'")
    report = parabolicity_margin(coeffs, vartheta, **{k: sampling[k] for k in sampling})
    doc = {
        "schema_version": SCHEMA_VERSION,
        "margin": report.margin,
        "vartheta": report.vartheta,
        "passed": report.passed,
        "spatial_min": report.spatial_min,
        "witness": report.witness,
        "samples": report.samples,
    }
    with open(_out(args, "parabolicity.json"), "w") as fh:
        write_json(doc, fh)
    print(f"parabolicity margin={report.margin:.12g} vartheta={vartheta:g} passed={report.passed}")
    return 0


def _cmd_norms(cfg, args, base_dir) -> int:
    path = _resolve(_cfg_get(cfg, "field"), base_dir)
    arr = np.asarray(np.load(path), dtype=np.complex128)
    _require(arr.ndim >= 3, "field file must hold an (m, n_seq, grid...) array")
    d = arr.ndim - 2
    n = arr.shape[2]
    _require(
        all(size == n for size in arr.shape[2:]) and n % 2 == 0,
        "grid axes must be equal and even",
    )
    lattice = Lattice(d, n // 2)
    n_seq = int(cfg.get("n_seq", 0 if arr.shape[1] == 1 else arr.shape[1]))
    field = SpectralField(lattice, arr, n_seq)
    entries = []
    for raw in _cfg_get(cfg, "norms"):
        kind = _cfg_get(raw, "kind")
        if kind == "lq":
            value = lq_norm(field, _exponent(_cfg_get(raw, "q")))
        elif kind == "bessel":
            value = bessel_norm(field, float(_cfg_get(raw, "s")), _exponent(_cfg_get(raw, "q")))
        elif kind == "besov":
            value = besov_norm(
                field,
                float(_cfg_get(raw, "s")),
                _exponent(_cfg_get(raw, "q")),
                _exponent(_cfg_get(raw, "p")),
            )
        elif kind == "holder":
            value = holder_norm(field, float(_cfg_get(raw, "t")))
        else:
            raise ParameterError(f"unknown norm kind '{kind}'")
        entries.append({**raw, "value": value})
        desc = " ".join(f"{k}={v}" for k, v in raw.items() if k != "kind")
        print(f"norm {kind} {desc} value={value:.12g}")
    doc = {
        "schema_version": SCHEMA_VERSION,
        "field": path,
        "d": d,
        "K": lattice.K,
        "m": arr.shape[0],
        "n_seq": n_seq,
        "norms": entries,
    }
    with open(_out(args, "norms.json"), "w") as fh:
        write_json(doc, fh)
    return 0


def _cmd_verify_multiplication(cfg, args, base_dir) -> int:
    raw_lat = _cfg_get(cfg, "lattice")
    lattice = Lattice(int(raw_lat["d"]), int(raw_lat["K"]))
    n_pairs = int(cfg.get("n_pairs", 50))
    seed = int(cfg.get("seed", 0))
    fields = cfg.get("fields", {})
    f_alpha = float(fields.get("f_alpha", 1.2))
    g_alpha = float(fields.get("g_alpha", 1.6))
    amplitude = float(fields.get("amplitude", 1.0))
    results = []
    for idx, case_cfg in enumerate(_cfg_get(cfg, "cases")):
        case = _cfg_get(case_cfg, "case")
        params = dict(_cfg_get(case_cfg, "params"))
        ratios = []
        eps = None
        for i in range(n_pairs):
            f = generate_holder_field(lattice, f_alpha, amplitude, derive_key(seed, idx, i, 0))
            g = generate_holder_field(lattice, g_alpha, amplitude, derive_key(seed, idx, i, 1))
            res = probe_multiplication(case, f, g, params)
            ratios.append(res.ratio)
            eps = res.eps
        entry = {
            "case": case,
            "params": params,
            "n_pairs": n_pairs,
            "max_ratio": max(ratios),
            "mean_ratio": float(np.mean(ratios)),
            "eps": eps,
        }
        results.append(entry)
        print(
            f"multiplication case={case} max_ratio={entry['max_ratio']:.12g} "
            f"mean_ratio={entry['mean_ratio']:.12g}"
        )
    doc = {"schema_version": SCHEMA_VERSION, "K": lattice.K, "d": lattice.d, "cases": results}
    with open(_out(args, "multiplication.json"), "w") as fh:
        write_json(doc, fh)
    return 0


def _cmd_solve(cfg, args, base_dir) -> int:
    coeffs = _coeffs_from_config(cfg, base_dir)
    form = _form_from_config(cfg)
    grid = _grid_from_config(cfg)
    sampler = _sampler_from_config(cfg, coeffs.lattice, coeffs.m, coeffs.n_noise)
    base_seed = int(cfg.get("base_seed", 0))
    path_index = int(cfg.get("path_index", 0))
    u0, f, g = sampler(path_index)
    path = solve_path(
        coeffs, form, grid, u0, f=f, g=g, base_seed=base_seed, path_index=path_index
    )
    traj_path = _out(args, "trajectory.bin")
    with open(traj_path, "wb") as fh:
        dump_trajectory(path, fh)
    final = path.field(grid.M)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "trajectory": os.path.basename(traj_path),
        "base_seed": base_seed,
        "path_index": path_index,
        "M": grid.M,
        "final_l2": lq_norm(final, 2),
        "final_linf": lq_norm(final, np.inf),
    }
    with open(_out(args, "solve.json"), "w") as fh:
        write_json(doc, fh)
    print(f"solve M={grid.M} final_l2={doc['final_l2']:.12g}")
    return 0


def _cmd_smr_experiment(cfg, args, base_dir) -> int:
    spec = _spec_from_config(cfg)
    form = _form_from_config(cfg)
    base_grid = _grid_from_config(cfg, spec)
    recipe = _cfg_get(cfg, "coefficients")
    if isinstance(recipe, str):
        with open(_resolve(recipe, base_dir)) as fh:
            recipe = json.load(fh)
    levels = int(cfg.get("refinement_levels", 1))
    _require(levels >= 1, "refinement_levels must be at least 1")
    n_paths = int(_cfg_get(cfg, "n_paths"))
    base_seed = int(_cfg_get(cfg, "base_seed"))
    vartheta = cfg.get("vartheta")
    experiment_id = str(cfg.get("experiment_id", "smr"))
    reports = []
    for level in range(levels):
        scaled = json.loads(json.dumps(recipe))
        scaled["lattice"]["K"] = int(recipe["lattice"]["K"]) * 2**level
        coeffs = recipe_to_coefficients(scaled)
        grid = TimeGrid(base_grid.s, base_grid.T, base_grid.M * 2**level, base_grid.gamma)
        sampler = _sampler_from_config(cfg, coeffs.lattice, coeffs.m, coeffs.n_noise)
        rep = smr_experiment(
            coeffs,
            spec,
            sampler,
            n_paths,
            grid,
            form=form,
            base_seed=base_seed,
            vartheta=None if vartheta is None else float(vartheta),
            sup_eps=cfg.get("sup_eps"),
            threads=args.threads,
            experiment_id=f"{experiment_id}-K{coeffs.lattice.K}-M{grid.M}",
        )
        reports.append(rep)
        print(
            f"smr level={level} K={rep.K} M={rep.M} margin={rep.margin:.6g} "
            f"ratio={rep.ratio:.12g} p95={rep.ratio_p95:.12g}"
        )
    timestamp = None if args.reproducible else time.strftime("%Y-%m-%dT%H:%M:%S")
    with open(_out(args, "smr_report.csv"), "w") as fh:
        write_report_csv(reports, fh, timestamp)
    with open(_out(args, "smr_summary.json"), "w") as fh:
        write_json(report_summary(reports), fh)
    xs = list(range(levels))
    with open(_out(args, "smr_ratio.svg"), "w") as fh:
        write_svg_chart(
            [
                ("ratio", xs, [r.ratio for r in reports]),
                ("p95", xs, [r.ratio_p95 for r in reports]),
            ],
            fh,
            title="regularity ratio vs refinement",
            xlabel="refinement level (K, M doubled)",
            ylabel="ratio",
        )
    return 0


def _cmd_perturbation_budget(cfg, args, base_dir) -> int:
    result = perturbation_budget(
        C_det=float(_cfg_get(cfg, "C_det")),
        C_sto=float(_cfg_get(cfg, "C_sto")),
        C_A=float(_cfg_get(cfg, "C_A")),
        C_B=float(_cfg_get(cfg, "C_B")),
        L_A=float(cfg.get("L_A", 0.0)),
        L_B=float(cfg.get("L_B", 0.0)),
        eps=float(_cfg_get(cfg, "eps")),
    )
    doc = {"schema_version": SCHEMA_VERSION, **result}
    with open(_out(args, "budget.json"), "w") as fh:
        write_json(doc, fh)
    print(f"budget pass={result['pass']} eta={result['eta']:.12g} sum={result['sum']:.12g}")
    return 0


_SUBCOMMANDS = {
    "check-parabolicity": _cmd_check_parabolicity,
    "norms": _cmd_norms,
    "verify-multiplication": _cmd_verify_multiplication,
    "solve": _cmd_solve,
    "smr-experiment": _cmd_smr_experiment,
    "perturbation-budget": _cmd_perturbation_budget,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="smrlab",
        description="Pseudo-spectral experiments for stochastic parabolic systems",
    )
    parser.add_argument("--config", required=True, help="path to the JSON experiment config")
    parser.add_argument(
        "--reproducible",
        action="store_true",
        help="suppress timestamps so repeated runs emit identical bytes",
    )
    parser.add_argument("--threads", type=int, default=None, help="worker threads for path loops")
    parser.add_argument("--out-dir", default=".", help="directory for artifacts")
    args = parser.parse_args(argv)

    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        print(f"error: config-io: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"error: config-parse: {exc}", file=sys.stderr)
        return 2

    name = cfg.get("subcommand")
    handler = _SUBCOMMANDS.get(name)
    if handler is None:
        known = ", ".join(sorted(_SUBCOMMANDS))
        print(f"error: validation: unknown subcommand '{name}' (known: {known})", file=sys.stderr)
        return 2
    base_dir = os.path.dirname(os.path.abspath(args.config))
    try:
        return handler(cfg, args, base_dir)
    except BlowUpError as exc:
        print(f"error: blow-up: {exc}", file=sys.stderr)
        return 3
    except (ParameterError, LatticeMismatchError) as exc:
        print(f"error: validation: {exc}", file=sys.stderr)
        return 2
    except (KeyError, TypeError, ValueError, OSError) as exc:
        print(f"error: config: {exc!r}", file=sys.stderr)
        return 2


def entrypoint():
    sys.exit(main())
