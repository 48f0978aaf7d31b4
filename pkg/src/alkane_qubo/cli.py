"""Command line front end.

Subcommands reproduce the full workflow: ``build`` emits the problem,
``enumerate`` runs the sampling pipeline, ``oracle`` dumps brute-force
ground truth, ``analyze`` produces the CSV analysis surfaces and
``verify`` cross-checks the modules against each other.

Exit codes: 0 success, 1 usage error, 2 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import analytics, oracle, qubo, sampler
from .decode import IsomerRegistry, NonConstructible, decode_onehot, sequence_to_tree

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFY = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad arguments; the contract here is 1
    def error(self, message):
        raise _UsageError(message)


def _write_output(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
            if not text.endswith("\n"):
                fh.write("\n")


def _sampler_config(args, m: int) -> sampler.SamplerConfig:
    schedule = None
    if args.sweeps is not None:
        schedule = sampler.AnnealSchedule(sweeps=args.sweeps)
    return sampler.SamplerConfig(
        batch_size=args.samples,
        lam=args.lam,
        perturb_enabled=args.perturb,
        reverse_enabled=args.reverse,
        s_star=args.s_star,
        pause_sweeps=args.pause,
        rng_seed=args.seed,
        block_moves=args.block_moves,
        schedule=schedule,
    )


def _add_sampling_args(p: argparse.ArgumentParser, default_lambda: float) -> None:
    p.add_argument("--samples", type=int, default=10000, help="samples per batch")
    p.add_argument("--perturb", action="store_true", help="penalize the most frequent ground state after each batch")
    p.add_argument("--lambda", dest="lam", type=float, default=default_lambda, help="penalty strength")
    p.add_argument("--reverse", action="store_true", help="refine each sample by re-heat / pause / re-cool")
    p.add_argument("--s-star", type=float, default=0.5, help="schedule fraction for refinement re-entry")
    p.add_argument("--pause", type=int, default=None, help="sweeps held at the re-entry temperature (default 10m)")
    p.add_argument("--seed", type=int, default=0, help="run seed (fixed seed => byte-identical output)")
    p.add_argument("--sweeps", type=int, default=None, help="override schedule length (default 50m)")
    p.add_argument("--block-moves", action="store_true", help="mix in one-hot-block swap proposals")
    p.add_argument("--threads", type=int, default=None, help="cap sampler worker threads")


def _apply_threads(args) -> None:
    if getattr(args, "threads", None):
        import numba

        numba.set_num_threads(max(1, args.threads))


def _cmd_build(args) -> int:
    penalties = qubo.PenaltyConfig(p1=args.p1, p2=args.p2)
    problem = qubo.build_qubo(args.n, penalties)
    if args.ising or args.scale:
        ising = qubo.qubo_to_ising(problem)
        if args.scale:
            ising = qubo.scale_ising(ising)
        rows, cols = np.nonzero(ising.j)
        doc = {
            "n": args.n,
            "h": ising.h.tolist(),
            "couplings": [[int(i), int(j), float(ising.j[i, j])] for i, j in sorted(zip(rows.tolist(), cols.tolist()))],
            "offset": ising.offset,
        }
        _write_output(json.dumps(doc, sort_keys=True), args.output)
    else:
        _write_output(qubo.problem_to_json(problem), args.output)
    return EXIT_OK


def _cmd_enumerate(args) -> int:
    _apply_threads(args)
    problem = qubo.build_qubo(args.n)
    config = _sampler_config(args, problem.m)
    target = len(oracle.brute_force_isomers(args.n)) if args.n <= oracle.MAX_BRUTE_FORCE_CARBONS else None
    registry = IsomerRegistry()
    report = sampler.run_pipeline(
        problem, config, registry,
        target_count=target, max_iterations=args.max_iterations,
        collect_records=args.dump_samples is not None,
    )
    _write_output(report.to_json(), args.output)
    if args.isomers is not None:
        _write_output(registry.to_jsonl(), args.isomers)
    if args.dump_samples is not None:
        lines = ["bits,energy_original,iteration,chain"]
        for r in report.records:
            lines.append(f"{''.join(map(str, r.bits))},{r.energy_original!r},{r.iteration},{r.chain_id}")
        _write_output("\n".join(lines) + "\n", args.dump_samples)
    return EXIT_OK


def _cmd_oracle(args) -> int:
    if args.mode == "isomers":
        registry = oracle.brute_force_isomers(args.n)
        _write_output(registry.to_jsonl(), args.output)
    else:
        problem = qubo.build_qubo(args.n, qubo.PenaltyConfig(p1=args.p1, p2=args.p2))
        states = oracle.brute_force_ground_states(problem)
        lines = []
        for row in states:
            lines.append(
                json.dumps(
                    {
                        "bits": "".join(map(str, row.tolist())),
                        "energy": float(qubo.matrix_eval(problem, row)),
                    },
                    sort_keys=True,
                )
            )
        _write_output("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def _cmd_analyze(args) -> int:
    _apply_threads(args)
    if args.mode == "hamming":
        encodings = analytics.representative_encodings(args.n)
        _write_output(analytics.hamming_csv(encodings, args.n), args.output)
        return EXIT_OK
    if args.mode == "histogram":
        problem = qubo.build_qubo(args.n)
        config = _sampler_config(args, problem.m)
        _, histogram = analytics.run_histogram_batch(problem, config)
        _write_output(analytics.histogram_csv(histogram), args.output)
        return EXIT_OK
    # coverage
    methods = []
    for label in args.methods.split(","):
        label = label.strip().upper()
        if label not in ("FA", "FA+QP", "RA", "RA+QP"):
            raise _UsageError(f"unknown method {label!r} (expected FA, FA+QP, RA or RA+QP)")
        methods.append(
            sampler.SamplerConfig(
                batch_size=args.samples,
                lam=args.lam,
                perturb_enabled=label.endswith("+QP"),
                reverse_enabled=label.startswith("RA"),
                s_star=args.s_star,
                pause_sweeps=args.pause,
                rng_seed=args.seed,
                block_moves=args.block_moves,
            )
        )
    stats = analytics.coverage_experiment(args.n, methods, args.repetitions, max_iterations=args.max_iterations)
    _write_output(analytics.coverage_csv(methods, stats), args.output)
    for config, stat in zip(methods, stats):
        print(f"{sampler.method_label(config)}: mean {stat.mean:.2f} median {stat.median:.1f}", file=sys.stderr)
    return EXIT_OK


def _cmd_verify(args) -> int:
    n = args.n
    checks: list[tuple[str, bool]] = []
    problem = qubo.build_qubo(n)
    rng = np.random.Generator(np.random.PCG64(12345))

    ys = rng.integers(0, 2, size=(2000, problem.m))
    direct = np.array([qubo.objective_eval(y, n) for y in ys])
    via_matrix = qubo.matrix_eval_batch(problem, ys) + problem.offset
    checks.append(("objective == y^T q y + offset", bool(np.allclose(direct, via_matrix, rtol=1e-9, atol=1e-9))))

    ising = qubo.qubo_to_ising(problem)
    ok = all(
        abs(qubo.matrix_eval(problem, y) - qubo.ising_eval(ising, 2 * np.asarray(y) - 1)) < 1e-6
        for y in ys[:200]
    )
    checks.append(("ising energies match qubo", ok))

    scaled = qubo.scale_ising(ising)
    checks.append(("scaled fields within bounds", bool(np.max(np.abs(scaled.h)) <= 2 + 1e-12 and np.max(np.abs(scaled.j)) <= 1 + 1e-12)))

    checks.append(("serialization round trip", qubo.problem_from_json(qubo.problem_to_json(problem)).q.tolist() == problem.q.tolist()))

    if problem.m <= 20:
        states = oracle.brute_force_ground_states(problem)
        feasible = all(oracle.constraint_check(row, n) for row in states)
        expected = sum(1 for _ in oracle.enumerate_feasible_interiors(n))
        checks.append(("ground states are exactly the feasible states", feasible and len(states) == expected))

        decoded = IsomerRegistry()
        for row in states:
            try:
                decoded.register(sequence_to_tree(decode_onehot(row, n)))
            except NonConstructible:
                continue
        truth = oracle.brute_force_isomers(n)
        checks.append(("decoded ground states == enumerated trees", decoded.certificates() == truth.certificates()))

    registry = IsomerRegistry()
    config = sampler.SamplerConfig(rng_seed=args.seed)
    target = len(oracle.brute_force_isomers(n)) if n <= oracle.MAX_BRUTE_FORCE_CARBONS else None
    sampler.run_pipeline(problem, config, registry, target_count=target, max_iterations=args.max_iterations)
    if target is not None:
        checks.append((f"pipeline finds all {target} isomers", len(registry) == target))

    failed = False
    for name, ok in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
        if not ok:
            failed = True
    return EXIT_VERIFY if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="alkane-qubo", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="emit the problem as JSON")
    p.add_argument("--n", type=int, required=True, help="carbon count (>= 3)")
    p.add_argument("--p1", type=float, default=1.0, help="one-hot penalty weight")
    p.add_argument("--p2", type=float, default=1.0, help="degree-sum penalty weight")
    p.add_argument("--ising", action="store_true", help="emit the spin form instead")
    p.add_argument("--scale", action="store_true", help="scale the spin form into |h|<=2, |J|<=1")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_build)

    p = sub.add_parser("enumerate", help="run the sampling pipeline")
    p.add_argument("--n", type=int, required=True)
    _add_sampling_args(p, default_lambda=5e-6)
    p.add_argument("--max-iterations", type=int, default=20)
    p.add_argument("-o", "--output", default=None, help="pipeline report JSON")
    p.add_argument("--isomers", default=None, help="write the isomer dump (JSON lines) here")
    p.add_argument("--dump-samples", default=None, help="write the raw sample CSV here")
    p.set_defaults(func=_cmd_enumerate)

    p = sub.add_parser("oracle", help="brute-force ground truth dumps")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mode", choices=("isomers", "ground-states"), default="isomers")
    p.add_argument("--p1", type=float, default=1.0)
    p.add_argument("--p2", type=float, default=1.0)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("analyze", help="emit analysis CSVs")
    p.add_argument("--mode", choices=("hamming", "histogram", "coverage"), required=True)
    p.add_argument("--n", type=int, required=True)
    _add_sampling_args(p, default_lambda=5e-6)
    p.add_argument("--repetitions", type=int, default=25, help="coverage repetitions per method")
    p.add_argument("--methods", default="FA,RA+QP", help="comma list of FA, FA+QP, RA, RA+QP")
    p.add_argument("--max-iterations", type=int, default=100)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("verify", help="cross-check modules against each other")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iterations", type=int, default=20)
    p.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
