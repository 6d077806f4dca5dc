"""Batch front end: one manifest per invocation, deterministic outputs.

Each subcommand writes three artifacts into the output directory:
  results.csv    - the measured table (RFC-4180 quoting, repr floats)
  summary.jsonl  - one record per assertion, with the anchor of the
                   inequality it checks and pass/fail plus measurements
  manifest.txt   - the canonical echo of the manifest that produced them

Exit codes: 0 success, 1 a numerical assertion failed, 2 configuration
error.  FRACLAP_OUT overrides the output directory, FRACLAP_THREADS the
BLAS thread count.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_CONFIG = 2


def _setup_threads():
    n = os.environ.get("FRACLAP_THREADS")
    if n:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, n)


def _fmt_cell(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path, header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, quoting=csv.QUOTE_MINIMAL, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt_cell(v) for v in row])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def write_summary(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def _domain_from(man):
    from .domain import DomainSpec

    lengths = man["lengths"]
    if man["dim"] == 2 and len(lengths) == 1:
        lengths = (lengths[0], lengths[0])
    return DomainSpec(lengths=lengths, mode_cutoff=man["mode_cutoff"], grid_n=man["grid_n"])


def _record(anchor, check, passed, **measured):
    return {
        "anchor": anchor,
        "check": check,
        "passed": bool(passed),
        "measured": measured,
    }


def _cmd_verify_cordoba(man, out):
    import numpy as np

    from .inequalities import DefectReport, cordoba_defect
    from .randfields import random_field

    domain = _domain_from(man)
    phis = {
        "r2/2": (lambda r: 0.5 * r * r, lambda r: r, lambda f: 1.0),
        "r4": (lambda r: r**4, lambda r: 4.0 * r**3, lambda f: 12.0 * np.abs(f).max() ** 2),
    }
    rows, records = [], []
    for s in man["s_values"]:
        for name, (phi, dphi, curv) in phis.items():
            worst = np.inf
            for k in range(man["samples"]):
                f = random_field(domain, man["seed"] + k)
                defect = cordoba_defect(f, phi, dphi, s)
                scale = f.sobolev_norm(s) ** 2 * curv(f.to_grid().values)
                rep = DefectReport.from_grid(defect, 1e-8 * scale)
                worst = min(worst, rep.min_defect / scale)
                rows.append([s, name, k, rep.min_defect, scale, rep.violation_count])
            records.append(
                _record(
                    "Prop-2.1",
                    f"min defect >= -1e-8*scale (Phi={name}, s={s})",
                    worst >= -1e-8,
                    min_defect_over_scale=worst,
                )
            )
    write_csv(out / "results.csv", ["s", "phi", "sample", "min_defect", "scale", "violations"], rows)
    return records


def _cmd_verify_lower_bound(man, out):
    from .inequalities import lower_bound_probe
    from .randfields import random_stream

    domain = _domain_from(man)
    rows, records = [], []
    for k in range(man["samples"]):
        q = random_stream(domain, man["seed"] + k)
        probe = lower_bound_probe(q, axis=0, alpha=man["alpha"], C_grid=man["c_grid"])
        found = None
        for C, res in probe["per_C"].items():
            rows.append([k, C, res.get("c_hat"), res["support"], probe["q_inf"]])
            if res["c_hat"] is not None and res["c_hat"] > 0 and found is None:
                found = C
        records.append(
            _record(
                "Thm-3.1",
                f"sample {k}: some C in sweep gives c_hat > 0",
                found is not None,
                C_found=found,
                min_defect=probe["min_defect"],
            )
        )
    write_csv(out / "results.csv", ["sample", "C", "c_hat", "support", "q_inf"], rows)
    return records


def _cmd_probe_heat_bounds(man, out):
    import numpy as np

    from .inequalities import heat_bound_probe, probe_time_window

    domain = _domain_from(man)
    t_samples = man["t_samples"] or probe_time_window(domain, 8)
    fit = heat_bound_probe(domain, t_samples=t_samples)
    c = fit.constants
    rows = [[k, v] for k, v in sorted(c.items())]
    write_csv(out / "results.csv", ["constant", "value"], rows)
    passed = c["c_hat"] > 0 and np.isfinite(c["C_hat"]) and c["c_hat"] <= c["C_hat"]
    return [_record("Eq-hb", "two-sided kernel bound admits finite positive fits", passed, **c)]


def _cmd_probe_grad_bounds(man, out):
    from .inequalities import grad_ratio_probe, probe_time_window

    domain = _domain_from(man)
    t_samples = man["t_samples"] or probe_time_window(domain, 8, log_factor=6.0)
    fit = grad_ratio_probe(domain, t_samples=t_samples)
    c = fit.constants
    write_csv(out / "results.csv", ["constant", "value"], [[k, v] for k, v in sorted(c.items())])
    passed = all(v >= 0 for v in c.values()) and any(v > 0 for v in c.values())
    return [_record("Eq-grbx", "per-branch gradient-ratio fits finite", passed, **c)]


def _cmd_halfspace(man, out):
    from .inequalities import halfspace_kernel_suite

    t_samples = man["t_samples"] or (0.25, 1.0, 4.0)
    rep = halfspace_kernel_suite(xd_samples=man["xd_samples"], t_samples=t_samples)
    rows = [[k, v] for k, v in sorted(rep.details.items())]
    write_csv(out / "results.csv", ["identity", "abs_error"], rows)
    return [
        _record(
            "Eq-hone",
            "half-space identities reproduced to 1e-9",
            rep.passed,
            worst_abs_error=-rep.min_defect,
        ),
        _record(
            "Eq-kernelone",
            "x^2 * int K dy equals the constant from the two identities",
            rep.violation_count == 0,
            violations=rep.violation_count,
        ),
    ]


def _cmd_probe_v0(man, out):
    from .extension import v0_equivalence_probe, v0_norm
    from .domain import sobolev_norm
    from .randfields import random_field

    domain = _domain_from(man)
    fields = [random_field(domain, man["seed"] + k) for k in range(man["samples"])]
    res = v0_equivalence_probe(fields)
    rows = [
        [k, v0_norm(f), sobolev_norm(f, 0.5)]
        for k, f in enumerate(fields)
    ]
    write_csv(out / "results.csv", ["sample", "v0_norm", "spectral_half_norm"], rows)
    passed = 0 < res["min_ratio"] <= res["max_ratio"] < float("inf")
    return [_record("Eq-vzerochar1", "trace/spectral norm equivalence ratios finite", passed, **res)]


def _cmd_commutator_suite(man, out):
    from .extension import commutator_advection, commutator_mult
    from .randfields import random_field, random_stream

    domain = _domain_from(man)
    rows, ratios_m, ratios_a = [], [], []
    for k in range(man["samples"]):
        a = random_stream(domain, man["seed"] + 2 * k)
        f = random_field(domain, man["seed"] + 2 * k + 1)
        rm = commutator_mult(a, f)["ratio"]
        ratios_m.append(rm)
        row = [k, rm]
        if domain.dim == 2:
            ra = commutator_advection(a, f)["ratio"]
            ratios_a.append(ra)
            row.append(ra)
        rows.append(row)
    header = ["sample", "mult_ratio"] + (["advection_ratio"] if domain.dim == 2 else [])
    write_csv(out / "results.csv", header, rows)
    records = [
        _record(
            "Thm-4.2",
            "multiplication commutator ratios finite over samples",
            max(ratios_m) < float("inf"),
            sup_ratio=max(ratios_m),
        )
    ]
    if ratios_a:
        records.append(
            _record(
                "Thm-4.3",
                "advection commutator ratios finite over samples",
                max(ratios_a) < float("inf"),
                sup_ratio=max(ratios_a),
            )
        )
    return records


def _run_common(man, out, mode):
    import numpy as np

    from .evolution import EvolutionConfig, make_velocity, run
    from .randfields import random_field, random_stream

    domain = _domain_from(man)
    config = EvolutionConfig(
        m=man["galerkin_m"] or domain.mode_cutoff,
        dt=man["dt"],
        t_end=man["t_end"],
        cfl_safety=man["cfl_safety"],
        diag_every=man["diag_every"],
    )
    theta0 = random_field(domain, man["seed"])
    velocity = None
    if mode == "linear" and domain.dim == 2:
        velocity = make_velocity(random_stream(domain, man["seed"] + 10_000))
    _, diag = run(config, theta0, velocity=velocity, mode=mode)
    arr = diag.as_arrays()
    keys = sorted(arr)
    rows = [[arr[k][i] for k in keys] for i in range(len(arr["times"]))]
    write_csv(out / "results.csv", keys, rows)
    energy = arr["energy"]
    l2_ok = bool(np.all(energy[1:] <= energy[:-1] * (1 + 1e-12) + 1e-300))
    records = [
        _record("Eq-l2", "energy nonincreasing along the run", l2_ok,
                first=float(energy[0]), last=float(energy[-1])),
        _record(
            "Eq-l2b",
            "cumulative dissipation bounded by initial energy",
            diag.cumulative_dissipation() <= energy[0] * 2.0 * (1 + 1e-6),
            dissipation_integral=diag.cumulative_dissipation(),
            initial_energy=float(energy[0]),
        ),
    ]
    lp_ok = True
    for p, series in diag.lp_norms.items():
        s = np.asarray(series)
        lp_ok &= bool(np.all(s[1:] <= s[:-1] * (1 + 1e-8) + 1e-300))
    records.append(_record("Eq-lp", "L^p norms nonincreasing (p in config list)", lp_ok))
    lam2 = arr["lambda2_sq"]
    if velocity is not None and mode == "linear":
        # envelope fit: smallest C with lam2(t) <= lam2(0) exp(C t ||u||_B^2)
        from .extension import b_norm_stream

        ub2 = b_norm_stream(velocity.stream).value ** 2
        times = arr["times"][1:]
        growth = np.log(np.maximum(lam2[1:], 1e-300) / lam2[0])
        C_fit = float(np.max(growth / (ub2 * times))) if len(times) else 0.0
        records.append(
            _record(
                "Eq-liv2b",
                "Lambda^2 energy inside a fitted Gronwall envelope",
                np.isfinite(C_fit),
                C_fit=C_fit,
                max_over_initial=float(lam2.max() / lam2[0]) if lam2[0] > 0 else 0.0,
            )
        )
    else:
        records.append(
            _record(
                "Eq-liv2b",
                "Lambda^2 energy nonincreasing without drift",
                bool(np.all(lam2 <= lam2[0] * (1 + 1e-8) + 1e-300)),
                max_over_initial=float(lam2.max() / lam2[0]) if lam2[0] > 0 else 0.0,
            )
        )
    return records


def _cmd_run_linear(man, out):
    return _run_common(man, out, "linear")


def _cmd_run_sqg(man, out):
    return _run_common(man, out, "sqg")


def _cmd_frac_oracle(man, out):
    import numpy as np

    from .calculus import HeatQuadratureSpec, apply_lambda_s, frac_heat_quadrature
    from .domain import to_grid
    from .randfields import random_field

    domain = _domain_from(man)
    q = HeatQuadratureSpec.default_for(domain, nodes=man["nodes"])
    if man["epsilon"] > 0 or man["t_max"] > 0:
        q = HeatQuadratureSpec(
            epsilon=man["epsilon"] or q.epsilon,
            t_max=man["t_max"] or q.t_max,
            nodes=man["nodes"],
        )
    rows, worst = [], 0.0
    for alpha in man["alphas"]:
        for k in range(man["samples"]):
            f = random_field(domain, man["seed"] + k)
            heat = frac_heat_quadrature(f, alpha, q)
            spectral = to_grid(apply_lambda_s(f, 2 * alpha))
            denom = spectral.l2_norm()
            rel = (heat - spectral).l2_norm() / denom if denom > 0 else 0.0
            rows.append([alpha, k, rel])
            worst = max(worst, rel)
    write_csv(out / "results.csv", ["alpha", "sample", "rel_l2_error"], rows)
    return [
        _record(
            "Eq-rep",
            "heat-route fractional power matches the spectral path to 1e-5",
            worst <= 1e-5,
            worst_rel_error=worst,
        )
    ]


_DISPATCH = {
    "verify-cordoba": _cmd_verify_cordoba,
    "verify-lower-bound": _cmd_verify_lower_bound,
    "probe-heat-bounds": _cmd_probe_heat_bounds,
    "probe-grad-bounds": _cmd_probe_grad_bounds,
    "halfspace-suite": _cmd_halfspace,
    "probe-v0": _cmd_probe_v0,
    "commutator-suite": _cmd_commutator_suite,
    "run-linear": _cmd_run_linear,
    "run-sqg": _cmd_run_sqg,
    "frac-oracle": _cmd_frac_oracle,
}


def dispatch(manifest, out_dir=None):
    """Run one manifest; returns (exit_code, summary records)."""
    from pathlib import Path

    from .manifest import write_manifest

    out = Path(os.environ.get("FRACLAP_OUT") or out_dir or manifest["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    write_manifest(manifest, out / "manifest.txt")
    try:
        records = _DISPATCH[manifest["subcommand"]](manifest, out)
    except (ValueError, KeyError) as exc:
        # domain/config validation failures are configuration errors
        write_summary(out / "summary.jsonl", [
            {"anchor": "config", "check": str(exc), "passed": False, "measured": {}}
        ])
        return EXIT_CONFIG, []
    write_summary(out / "summary.jsonl", records)
    if all(rec["passed"] for rec in records):
        return EXIT_OK, records
    return EXIT_NUMERICAL, records


def main(argv=None):
    _setup_threads()
    parser = argparse.ArgumentParser(
        prog="fraclap",
        description="Spectral probes and Galerkin solvers for the Dirichlet "
        "fractional Laplacian on intervals and rectangles.",
    )
    parser.add_argument("subcommand", choices=sorted(_DISPATCH))
    parser.add_argument("--manifest", required=True, help="path to the run manifest")
    parser.add_argument("--out", default=None, help="output directory override")
    parser.add_argument("--seed", type=int, default=None, help="seed override")
    args = parser.parse_args(argv)

    from .manifest import ManifestError, RunManifest, parse_manifest

    try:
        man = parse_manifest(args.manifest)
        if man["subcommand"] != args.subcommand:
            raise ManifestError(
                f"manifest subcommand {man['subcommand']!r} does not match "
                f"CLI subcommand {args.subcommand!r}",
                keys=["subcommand"],
            )
        if args.seed is not None:
            values = dict(man.values)
            values["seed"] = args.seed
            man = RunManifest(values)
    except (ManifestError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    code, records = dispatch(man, out_dir=args.out)
    for rec in records:
        status = "PASS" if rec["passed"] else "FAIL"
        print(f"[{status}] {rec['anchor']}: {rec['check']}")
    return code


if __name__ == "__main__":
    sys.exit(main())
