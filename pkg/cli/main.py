#!/usr/bin/env python3
"""phasefield command line.

Exit codes: 0 success, 2 invalid input or configuration, 3 solver failure, 4 failed acceptance.
"""

import argparse
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from phasefield.analysis.density import density_ratio, nearest_vertex
from phasefield.analysis.levelset import extract_level_set
from phasefield.entire.index_bound import index_lower_bound_check
from phasefield.entire.lines import make_line_config
from phasefield.exceptions import PhaseFieldInputError
from phasefield.model.heteroclinic import profile_energy, profile_table, solve_heteroclinic
from phasefield.model.potential import get_potential, interface_constants, validate_potential
from phasefield.solver.newton import dirichlet_mask
from phasefield.solver.spectrum import morse_index

from .acceptance import evaluate_acceptance
from .config import load_run_config
from .logging_config import setup_logging
from .pipeline import load_run, run_experiment

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_SOLVER = 3
EXIT_ACCEPTANCE = 4


def _emit(payload: Dict[str, Any], output: Optional[str] = None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if output:
        Path(output).write_text(text + "\n")
        logger.info(f"Wrote {output}")
    else:
        print(text)


def _potential(args: argparse.Namespace):
    if args.config:
        settings = load_run_config(args.config).potential
        return get_potential(**settings.model_dump())
    return get_potential(args.potential, args.coefficients)


def cmd_potential_check(args: argparse.Namespace) -> int:
    p = _potential(args)
    report = validate_potential(p)
    payload = report.model_dump(mode="json")
    payload["passed"] = report.passed
    if report.passed:
        payload["constants"] = interface_constants(p).model_dump(mode="json")
    _emit(payload, args.output)
    if not report.passed:
        logger.error(f"Potential {p.name} fails {report.failed()}")
        return EXIT_INVALID
    return EXIT_OK


def cmd_heteroclinic(args: argparse.Namespace) -> int:
    p = _potential(args)
    profile = solve_heteroclinic(p, args.half_width, args.step)
    table = profile_table(profile)
    table.to_csv(args.output, index=False, float_format="%.17g")
    constants = interface_constants(p)
    logger.info(
        f"Profile on [-{profile.half_width:g}, {profile.half_width:g}] written to {args.output}; "
        f"int H'^2 = {profile_energy(profile):.10f}, sigma = {constants.sigma:.10f}"
    )
    return EXIT_OK


def _run(
    args: argparse.Namespace, experiment: str, extra: Optional[Dict[str, Any]] = None
) -> int:
    overrides: Dict[str, Any] = {"experiment": experiment, **(extra or {})}
    if args.output_dir:
        overrides["output_dir"] = args.output_dir
    if args.seed is not None:
        overrides["seed"] = args.seed
    config = load_run_config(args.config, **overrides)
    report = run_experiment(config)
    summary = report.model_dump(mode="json", include={"experiment", "complete", "provenance"})
    summary["output_dir"] = config.output_dir
    _emit(summary)
    return EXIT_OK


def cmd_minmax(args: argparse.Namespace) -> int:
    return _run(args, "minmax")


def cmd_entire(args: argparse.Namespace) -> int:
    entire = {
        key: value
        for key, value in (
            ("angles", args.angles),
            ("offsets", args.offsets),
            ("box", args.box),
            ("h", args.h),
        )
        if value is not None
    }
    if args.ends is not None:
        angles = args.angles or load_run_config(args.config).entire.angles
        count = len(angles)
        if count != args.ends:
            raise PhaseFieldInputError(f"--ends {args.ends} does not match {count} angles")
    return _run(args, "entire", {"entire": entire} if entire else None)


def cmd_index(args: argparse.Namespace) -> int:
    run = load_run(args.run)
    u = run.field(args.field)
    p = run.model.potential
    spectrum = run.config.spectrum
    if run.config.experiment == "entire":
        entire = run.config.entire
        angle = entire.direction_angle
        verdict = index_lower_bound_check(
            u,
            run.ops,
            run.mesh,
            p,
            make_line_config(entire.angles, entire.offsets).k,
            q=spectrum.q,
            tol=spectrum.tol,
            direction=(math.cos(angle), math.sin(angle)),
            nested=entire.nested or None,
        )
        payload = verdict.model_dump(mode="json")
    else:
        fixed = dirichlet_mask(run.mesh)
        summary = morse_index(
            u,
            run.ops,
            p,
            q=spectrum.q,
            tol=spectrum.tol,
            fixed=fixed if fixed.any() else None,
            critical_tol=spectrum.critical_tol,
            dense_limit=spectrum.dense_limit,
        )
        payload = summary.to_report()
    payload["field"] = args.field
    run.store.write_json(f"index_{u.epsilon:g}", payload, kind="index")
    run.store.save_manifest()
    _emit(payload, args.output)
    return EXIT_OK


def cmd_levelset(args: argparse.Namespace) -> int:
    run = load_run(args.run)
    u = run.field(args.field)
    curves = extract_level_set(u.values, run.mesh, args.t)
    if args.output:
        curves.to_frame().to_csv(args.output, index=False, float_format="%.17g")
        logger.info(f"{curves.n_curves} curve(s) written to {args.output}")
    else:
        run.store.write_curves(f"levelset_t{args.t:g}", curves)
        run.store.save_manifest()
    return EXIT_OK


def cmd_density(args: argparse.Namespace) -> int:
    run = load_run(args.run)
    u = run.field(args.field)
    center = nearest_vertex(run.mesh, args.center)
    radii: List[float] = args.radii or run.config.varifold.probe_radii
    report = density_ratio(
        u, run.ops, run.mesh, run.model.potential, center, radii, args.monotonicity_m
    )
    run.store.write_density(f"density_v{center}", report)
    run.store.save_manifest()
    _emit(report.to_report(), args.output)
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    result = evaluate_acceptance(args.run)
    _emit(result.model_dump(mode="json"), args.output)
    return EXIT_OK if result.passed else EXIT_ACCEPTANCE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phasefield", description="Allen-Cahn min-max and entire-solution experiments"
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="DEBUG logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def potential_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--potential", default="quartic", help="Built-in potential name")
        p.add_argument("--coefficients", type=float, nargs="+", default=None)
        p.add_argument("--config", default=None, help="Take the potential from a run file")

    p = sub.add_parser("potential-check", help="Check the double-well hypotheses")
    potential_args(p)
    p.add_argument("--output", default=None, help="JSON file (default stdout)")
    p.set_defaults(func=cmd_potential_check)

    p = sub.add_parser("heteroclinic", help="Tabulate the heteroclinic profile")
    potential_args(p)
    p.add_argument("--half-width", type=float, default=12.0)
    p.add_argument("--step", type=float, default=0.005)
    p.add_argument("--output", default="heteroclinic.csv", help="CSV with columns s,H,Hprime")
    p.set_defaults(func=cmd_heteroclinic)

    for name, func, text, run_file in (
        ("minmax", cmd_minmax, "Epsilon-continuation min-max with diagnostics", "run.toml"),
        ("entire", cmd_entire, "Glue, refine and test a 2k-ended planar solution", "saddle.toml"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", default=f"configs/{run_file}", help="TOML run file")
        p.add_argument("--output-dir", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.set_defaults(func=func)

    entire_parser = sub.choices["entire"]
    entire_parser.add_argument("--ends", type=int, default=None, help="Number of ends 2k")
    entire_parser.add_argument("--angles", type=float, nargs="+", default=None)
    entire_parser.add_argument("--offsets", type=float, nargs="+", default=None)
    entire_parser.add_argument("--box", type=float, default=None, help="Box half width L")
    entire_parser.add_argument("--h", type=float, default=None, help="Target grid spacing")

    def run_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--run", required=True, help="Run directory")
        p.add_argument("--field", default=None, help="Field artifact (default the last one)")
        p.add_argument("--output", default=None)

    p = sub.add_parser("index", help="Morse index of a stored field")
    run_args(p)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("levelset", help="Level set of a stored field as CSV polylines")
    run_args(p)
    p.add_argument("--t", type=float, default=0.0, help="Level in (-1, 1)")
    p.set_defaults(func=cmd_levelset)

    p = sub.add_parser("density", help="Density ratios of a stored field")
    run_args(p)
    p.add_argument("--center", type=float, nargs="+", required=True, help="Probe point")
    p.add_argument("--radii", type=float, nargs="+", default=None)
    p.add_argument("--monotonicity-m", type=float, default=0.0)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("report", help="Evaluate acceptance checks on a run directory")
    p.add_argument("--run", required=True)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)
    try:
        return args.func(args)
    except ValueError as exc:
        logger.error(f"{type(exc).__name__}: {exc}", exc_info=args.verbose)
        return EXIT_INVALID
    except RuntimeError as exc:
        logger.error(f"{type(exc).__name__}: {exc}", exc_info=True)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
