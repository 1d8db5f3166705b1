"""Command-line interface: ``genbound {bounds,glm,verify}``.

Exit codes: 0 success, 1 a verification check failed, 2 usage or parse
error, 3 a scenario violates a domain invariant.
"""
from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

from . import bounds_standard as bs
from . import bounds_subsample as br
from . import glm, scenario_io, verify
from .prob import EnumerationGuardError, InvariantError, SupersampleScenario

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE, EXIT_INVARIANT = 0, 1, 2, 3
RS_MAX_N, RS_MAX_SAMPLES = 4, 3


class _Usage(Exception):
    pass


def bundled_scenarios() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files("genbound.scenarios").iterdir() if p.name.endswith(".json"))


def _bundled_path(name: str):
    if name not in bundled_scenarios():
        raise _Usage(f"unknown bundled scenario {name!r}; available: {', '.join(bundled_scenarios())}")
    return resources.files("genbound.scenarios") / f"{name}.json"


def _emit(text: str, out: str | None, force: bool):
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    path = Path(out)
    if path.exists() and not force:
        raise _Usage(f"refusing to overwrite {path} (pass --force)")
    path.write_text(text)


def full_report(sc, m_values=(1,)) -> bs.BoundReport:
    """Standard-setting report, extended with supersample bounds when enumerable."""
    report = bs.standard_report(sc, m_values)
    if sc.n <= RS_MAX_N and len(sc.samples) <= RS_MAX_SAMPLES:
        try:
            rs = SupersampleScenario.from_standard(sc)
        except EnumerationGuardError:
            return report
        rs_report = br.subsample_report(rs, m_values)
        report.bounds.update(rs_report.bounds)
        report.metadata["empirical_gen"] = rs_report.gen
    return report


def cmd_bounds(args) -> int:
    source = _bundled_path(args.bundled) if args.bundled else args.scenario
    if source is None:
        raise _Usage("give a scenario file or --bundled NAME")
    sc = scenario_io.load_scenario(source)
    m_values = tuple(args.m or (1,))
    if any(not 1 <= m <= sc.n for m in m_values):
        raise _Usage(f"--m values must lie in [1, {sc.n}]")
    report = full_report(sc, m_values)
    text = scenario_io.report_to_csv(report) if args.format == "csv" else scenario_io.report_to_json(report)
    _emit(text, args.output, args.force)
    return EXIT_OK


def _int_list(text: str) -> list[int]:
    try:
        values = [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def cmd_glm(args) -> int:
    if args.trials < 1000:
        raise _Usage("--trials must be at least 1000")
    cfg = glm.GlmConfig(d=args.d, sigma2=args.sigma2, n_values=tuple(args.n_list),
                        mu=args.mu, trials=args.trials, seed=args.seed)
    if any(n < 2 for n in cfg.n_values):
        raise _Usage("every n in --n-list must be at least 2")
    points = glm.glm_sweep(cfg, monte_carlo=not args.no_mc, workers=verify.default_workers())
    _emit(glm.sweep_to_csv(cfg, points), args.output, args.force)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.trials < 1:
        raise _Usage("--trials must be at least 1")
    sampler = verify.ScenarioSampler(seed=args.seed)
    mutation = 0.9 if args.mutate else 1.0
    reports = verify.run_suite(args.suite, sampler, args.trials, mutation=mutation)
    lines = []
    for r in reports:
        doc = scenario_io.json_safe(r.to_dict())
        doc = {"schema_version": 1, "suite": args.suite, **doc}
        lines.append(json.dumps(doc, sort_keys=True))
    _emit("\n".join(lines) + "\n", args.output, args.force)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="genbound", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def output_flags(p):
        p.add_argument("-o", "--output", help="output file (default: stdout)")
        p.add_argument("--force", action="store_true", help="overwrite an existing output file")

    p = sub.add_parser("bounds", help="exact generalization error and every bound for a scenario file")
    p.add_argument("scenario", nargs="?", help="scenario JSON file")
    p.add_argument("--bundled", metavar="NAME", help="use a bundled scenario (memorizer, independent)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--m", type=int, nargs="+", help="random-subset sizes (default: 1)")
    output_flags(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("glm", help="Gaussian location model sweep as CSV")
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--n-list", type=_int_list, default=[10, 100, 1000])
    p.add_argument("--mu", type=float, default=None, help="mean shift applied to every coordinate")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--no-mc", action="store_true", help="skip the Monte Carlo columns")
    output_flags(p)
    p.set_defaults(func=cmd_glm)

    p = sub.add_parser("verify", help="randomized verification suites as JSON lines")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--suite", choices=("orderings", "mi", "validity", "appendix-h", "all"), default="all")
    p.add_argument("--mutate", action="store_true", help="scale every bound by 0.9 to test the checker")
    output_flags(p)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (_Usage, scenario_io.ScenarioParseError, OSError) as exc:
        print(f"genbound {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvariantError, EnumerationGuardError) as exc:
        print(f"genbound {args.command}: invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except ValueError as exc:
        print(f"genbound {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
