"""Command-line front end.

Subcommands: gen-system, sample, synthesize, certify, bench-table,
bound-curves, render. Every command writes a run manifest next to its
primary output; replaying a manifest's argv reproduces all value-carrying
outputs byte-identically (wall-time columns excepted).

Exit codes: 0 success (inconclusive certificates included), 2 usage or
malformed input, 3 nonconvergence, 4 numerical failure.
"""

import argparse
import csv
import json
import sys
import time

from . import __version__
from .certify import (
    confidence_B,
    contraction_certificate,
    gamma_lower,
    scenario_certificate,
    solve_N_for_confidence,
    vertex_sets_match,
)
from .errors import NonConvergenceError, NumericalFailure, ValidationError
from .geometry import inclusion_ratio, load_polytope, save_polytope, unit_box
from .invariance import (
    IterationConfig,
    data_driven_invariant_set,
    model_based_invariant_set,
    write_trace_csv,
)
from .numerics.rng import RandomSource
from .plots import bench_figure, curves_figure, polytopes_svg
from .reports import certificate_report, save_report
from .system import (
    generate_stable_system,
    load_samples,
    load_system,
    product_norm_bound,
    sample_observations,
    save_samples,
    save_system,
)

USAGE_ERROR = 2
NONCONVERGENCE = 3
NUMERICAL_FAILURE = 4


def _manifest_path(out: str) -> str:
    return str(out) + ".manifest.json"


def _write_manifest(args, argv, inputs, outputs, wall_ms):
    flags = {k: v for k, v in vars(args).items() if k not in ("func",)}
    payload = {
        "command": args.command,
        "argv": list(argv),
        "flags": flags,
        "seed": flags.get("seed"),
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p) for p in outputs],
        "version": __version__,
        "wall_ms": wall_ms,
    }
    with open(_manifest_path(args.out), "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, default=str)
        fh.write("\n")


def replay_manifest(path) -> int:
    """Re-run the command recorded in a manifest (same argv, same outputs)."""
    with open(path, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    return main(manifest["argv"])


def _int_list(text: str) -> list[int]:
    vals = [int(v) for v in text.split(",") if v.strip() != ""]
    if not vals:
        raise ValueError("empty list")
    return vals


def _float_list(text: str) -> list[float]:
    vals = [float(v) for v in text.split(",") if v.strip() != ""]
    if not vals:
        raise ValueError("empty list")
    return vals


def _init_polytope(args, n):
    if getattr(args, "init", None):
        X = load_polytope(args.init)
        if X.n != n:
            raise ValidationError(
                f"initial set dimension {X.n} does not match data dimension {n}"
            )
        return X
    return unit_box(n)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_gen_system(args, argv) -> int:
    t0 = time.perf_counter()
    rng = RandomSource(args.seed)
    system = generate_stable_system(args.n, args.modes, args.decay, rng)
    save_system(system, args.out)
    bound = product_norm_bound(system, 3)
    _write_manifest(args, argv, [], [args.out], (time.perf_counter() - t0) * 1e3)
    print(f"wrote {args.out}: n={system.n}, modes={system.M}, "
          f"certified decay bound {bound:.6f}")
    return 0


def cmd_sample(args, argv) -> int:
    t0 = time.perf_counter()
    if args.N < 1:
        raise ValueError(f"--N must be >= 1, got {args.N}")
    system = load_system(args.system)
    rng = RandomSource(args.seed)
    samples = sample_observations(system, args.N, rng)
    save_samples(samples, args.out)
    _write_manifest(
        args, argv, [args.system], [args.out], (time.perf_counter() - t0) * 1e3
    )
    print(f"wrote {args.out}: N={len(samples)} observations (seed {args.seed})")
    return 0


def cmd_synthesize(args, argv) -> int:
    t0 = time.perf_counter()
    samples = load_samples(args.samples)
    X = _init_polytope(args, samples.n)
    cfg = IterationConfig(tolerance=args.tol, max_iterations=args.max_iter)
    trace_path = args.trace or (str(args.out) + ".trace.csv")
    try:
        S, trace = data_driven_invariant_set(samples, X, cfg)
    except NonConvergenceError as exc:
        if exc.trace is not None:
            write_trace_csv(exc.trace, trace_path)
        print(f"error: {exc} (trace written to {trace_path})", file=sys.stderr)
        return NONCONVERGENCE
    save_polytope(S, args.out)
    outputs = [args.out]
    if args.trace:
        write_trace_csv(trace, args.trace)
        outputs.append(args.trace)
    _write_manifest(
        args, argv, [args.samples], outputs, (time.perf_counter() - t0) * 1e3
    )
    print(
        f"wrote {args.out}: converged after {trace.iterations} hull updates, "
        f"{S.vertex_count} vertices, {S.facet_count} facets"
    )
    return 0


def cmd_certify(args, argv) -> int:
    t0 = time.perf_counter()
    S = load_polytope(args.polytope)
    inputs = [args.polytope]
    if args.mode == "contraction":
        if args.epsilon is None or args.N is None or args.modes is None:
            raise ValueError(
                "contraction mode requires --epsilon, --N and --modes"
            )
        cert = contraction_certificate(S, args.epsilon, args.N, args.modes)
        report = certificate_report(cert)
        report["inputs"]["n"] = S.n
        report["inputs"]["polytope"] = str(args.polytope)
        status = cert.status
    else:
        if args.samples is None:
            raise ValueError("scenario mode requires --samples")
        samples = load_samples(args.samples)
        inputs.append(args.samples)
        if samples.n != S.n:
            raise ValidationError("polytope/sample dimension mismatch")
        X = _init_polytope(args, samples.n)
        cfg = IterationConfig(tolerance=args.tol, max_iterations=args.max_iter)
        resynth, _ = data_driven_invariant_set(samples, X, cfg)
        cert = scenario_certificate(samples, X, cfg, args.beta)
        report = certificate_report(cert)
        report["inputs"]["n"] = S.n
        report["inputs"]["polytope"] = str(args.polytope)
        report["inputs"]["tolerance"] = args.tol
        report["inputs"]["polytope_matches_resynthesis"] = vertex_sets_match(
            resynth, S, 1.0e-9
        )
        status = "vacuous" if cert.vacuous else "certified"
    save_report(report, args.out)
    _write_manifest(args, argv, inputs, [args.out], (time.perf_counter() - t0) * 1e3)
    print(f"wrote {args.out}: {report['type']} certificate, status {status}")
    return 0


def cmd_bench_table(args, argv) -> int:
    t0 = time.perf_counter()
    dims = _int_list(args.dims)
    mode_counts = _int_list(args.modes)
    base = RandomSource(args.seed)
    cfg = IterationConfig(tolerance=args.tol, max_iterations=args.max_iter)
    rows = []
    index = 0
    for n in dims:
        for M in mode_counts:
            sys_rng = base.child(2 * index)
            samp_rng = base.child(2 * index + 1)
            index += 1
            row = {"n": n, "M": M}
            row_t0 = time.perf_counter()
            try:
                system = generate_stable_system(n, M, args.decay, sys_rng)
                samples = sample_observations(system, args.N, samp_rng)
                X = unit_box(n)
                S_data, tr_data = data_driven_invariant_set(samples, X, cfg)
                S_model, tr_model = model_based_invariant_set(system, X, cfg)
                row.update(
                    k_tilde=tr_data.iterations,
                    V_tilde=S_data.vertex_count,
                    k_star=tr_model.iterations,
                    V_star=S_model.vertex_count,
                    lambda_star=inclusion_ratio(S_data, S_model),
                )
            except (NonConvergenceError, NumericalFailure, ValueError) as exc:
                row["error"] = str(exc)
                print(f"row ({n},{M}) failed: {exc}", file=sys.stderr)
            row["ms"] = (time.perf_counter() - row_t0) * 1e3
            rows.append(row)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["n", "M", "k_tilde", "V_tilde", "k_star", "V_star", "lambda_star", "ms"]
        )
        for row in rows:
            writer.writerow(
                [
                    row["n"],
                    row["M"],
                    row.get("k_tilde", ""),
                    row.get("V_tilde", ""),
                    row.get("k_star", ""),
                    row.get("V_star", ""),
                    (
                        repr(row["lambda_star"])
                        if row.get("lambda_star") is not None
                        else ""
                    ),
                    f"{row['ms']:.3f}",
                ]
            )
    fig_path = str(args.out) + ".png"
    bench_figure(rows, fig_path)
    _write_manifest(
        args, argv, [], [args.out, fig_path], (time.perf_counter() - t0) * 1e3
    )
    done = sum(1 for r in rows if "lambda_star" in r)
    print(f"wrote {args.out} (+.png): {done}/{len(rows)} rows completed")
    return 0


def _epsilon_for_confidence(N: int, beta: float, M: int, n: int):
    """Bisect for the epsilon with confidence_B(eps; N) = beta, if any."""
    lo, hi = 1.0e-9, 0.5 - 1.0e-12
    if confidence_B(hi, N, M, n) > beta:
        return None
    if confidence_B(lo, N, M, n) <= beta:
        return lo
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if confidence_B(mid, N, M, n) > beta:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1.0e-14:
            break
    return hi


def cmd_bound_curves(args, argv) -> int:
    t0 = time.perf_counter()
    if (args.eps_grid is None) == (args.N_grid is None):
        raise ValueError("provide exactly one of --eps-grid and --N-grid")
    n, M, beta = args.n, args.modes, args.beta
    base = RandomSource(args.seed)
    system = generate_stable_system(n, M, args.decay, base.child(0))
    X = unit_box(n)
    cfg = IterationConfig(tolerance=args.tol, max_iterations=args.max_iter)

    grid: list[tuple[int, float | None]] = []  # (N, epsilon or None)
    if args.eps_grid is not None:
        for eps in _float_list(args.eps_grid):
            if not 0.0 < eps < 0.5:
                raise ValueError(f"epsilon values must lie in (0, 1/2), got {eps}")
            grid.append((solve_N_for_confidence(eps, beta, M, n), eps))
    else:
        for N in _int_list(args.N_grid):
            if N < 1:
                raise ValueError(f"sample counts must be >= 1, got {N}")
            grid.append((N, _epsilon_for_confidence(N, beta, M, n)))

    rows = []
    for i, (N, eps) in enumerate(grid):
        samples = sample_observations(system, N, base.child(i + 1))
        S, _ = data_driven_invariant_set(samples, X, cfg)
        lam_B = None
        if eps is not None:
            cert = contraction_certificate(S, eps, N, M)
            if cert.status == "certified":
                lam_B = cert.contraction_rate
        scen = scenario_certificate(samples, X, cfg, beta)
        lam_eps = None
        level = M * scen.epsilon_of_s
        if not scen.vacuous and level < 0.5:
            g, _ = gamma_lower(S, level)
            lam_eps = 1.0 / g
        rows.append({"curve": "lambda_B", "N": N, "value": lam_B})
        rows.append({"curve": "lambda_eps", "N": N, "value": lam_eps})

    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["curve", "N", "value"])
        for row in rows:
            writer.writerow(
                [
                    row["curve"],
                    row["N"],
                    repr(row["value"]) if row["value"] is not None else "",
                ]
            )
    fig_path = str(args.out) + ".png"
    curves_figure(rows, fig_path)
    _write_manifest(
        args, argv, [], [args.out, fig_path], (time.perf_counter() - t0) * 1e3
    )
    print(f"wrote {args.out} (+.png): {len(grid)} grid points")
    return 0


def cmd_render(args, argv) -> int:
    t0 = time.perf_counter()
    polys = [load_polytope(p) for p in args.polytope]
    for p, path in zip(polys, args.polytope):
        if p.n != 2:
            raise ValueError(
                f"{path} has dimension {p.n}; rendering supports dimension 2 only"
            )
    xs = ys = None
    inputs = list(args.polytope)
    if args.samples:
        samples = load_samples(args.samples)
        if samples.n != 2:
            raise ValueError("sample overlay requires 2-D samples")
        xs, ys = samples.xs, samples.ys
        inputs.append(args.samples)
    svg = polytopes_svg(polys, sample_points=xs, successor_points=ys)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(svg)
    _write_manifest(args, argv, inputs, [args.out], (time.perf_counter() - t0) * 1e3)
    print(f"wrote {args.out}: {len(polys)} polygon(s)")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polyinv",
        description=(
            "Polyhedral invariant sets for switched linear systems from "
            "sampled observations, with probabilistic certificates."
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-system", help="generate a random stable system")
    p.add_argument("--n", type=int, required=True, help="state dimension (2..8)")
    p.add_argument("--modes", type=int, required=True, help="number of modes (1..16)")
    p.add_argument("--decay", type=float, default=0.95,
                   help="certified decay bound in (0,1)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output system JSON")
    p.set_defaults(func=cmd_gen_system)

    p = sub.add_parser("sample", help="sample sphere observations from a system")
    p.add_argument("--system", required=True, help="system JSON path")
    p.add_argument("--N", type=int, required=True, help="number of observations")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output samples JSON")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("synthesize", help="compute the data-driven invariant set")
    p.add_argument("--samples", required=True, help="samples JSON path")
    p.add_argument("--tol", type=float, default=1.0e-8, help="stopping tolerance")
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--init", help="initial C-polytope JSON (default: unit box)")
    p.add_argument("--out", required=True, help="output polytope JSON")
    p.add_argument("--trace", help="also write the iteration trace CSV here")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("certify", help="attach a probabilistic certificate")
    p.add_argument("--polytope", required=True, help="polytope JSON path")
    p.add_argument("--mode", choices=("contraction", "scenario"), required=True)
    p.add_argument("--epsilon", type=float, help="violation level (contraction)")
    p.add_argument("--N", type=int, help="sample count behind the set (contraction)")
    p.add_argument("--modes", type=int, help="mode count (contraction)")
    p.add_argument("--samples", help="samples JSON (scenario)")
    p.add_argument("--beta", type=float, default=0.001, help="confidence parameter")
    p.add_argument("--tol", type=float, default=1.0e-8)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--init", help="initial C-polytope JSON (default: unit box)")
    p.add_argument("--out", required=True, help="output certificate JSON")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("bench-table", help="benchmark grid over (n, M)")
    p.add_argument("--dims", required=True, help='comma list, e.g. "2,3,4"')
    p.add_argument("--modes", required=True, help='comma list, e.g. "4,6"')
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--decay", type=float, default=0.95)
    p.add_argument("--tol", type=float, default=1.0e-8)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output CSV (figure at <out>.png)")
    p.set_defaults(func=cmd_bench_table)

    p = sub.add_parser("bound-curves", help="certified-rate curves against N")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--modes", type=int, required=True)
    p.add_argument("--beta", type=float, default=0.001)
    p.add_argument("--eps-grid", dest="eps_grid", help='comma list of epsilons')
    p.add_argument("--N-grid", dest="N_grid", help="comma list of sample counts")
    p.add_argument("--decay", type=float, default=0.95)
    p.add_argument("--tol", type=float, default=1.0e-8)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output CSV (figure at <out>.png)")
    p.set_defaults(func=cmd_bound_curves)

    p = sub.add_parser("render", help="render 2-D polytopes to a static SVG")
    p.add_argument("--polytope", action="append", required=True,
                   help="polytope JSON (repeatable; drawn in order)")
    p.add_argument("--samples", help="overlay these observations")
    p.add_argument("--out", required=True, help="output SVG path")
    p.set_defaults(func=cmd_render)

    return parser


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, argv)
    except (ValueError, ValidationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except NonConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return NONCONVERGENCE
    except NumericalFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return NUMERICAL_FAILURE


if __name__ == "__main__":
    sys.exit(main())
