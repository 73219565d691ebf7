"""
Command-line front end.

    python main.py solve  --config run.json
    python main.py eval   --solution solution.txt --points points.csv [--out values.csv]
    python main.py table1 [--n 7] [--json]
    python main.py corner --solution solution.txt [--corner 0,0,1] [--distance 0.0866] [--resolution 60]

Exit codes: 0 ok, 2 bad config or arguments, 3 numerical failure, 4 out-of-domain eval rows,
5 comparison outside its acceptance bands.
"""

import argparse
import json
import logging
import os
import sys

import numpy as np
import pandas as pd

import helpers
from srcube.errors import ConfigError, GeometryError, SRCubeError
from srcube.geometry import BoundaryData, is_strictly_interior
from srcube.pipeline import (ProblemSpec, check_bands, compare_backends, corner_slice, corner_slice_points,
                             evaluate_many, load_solution, save_solution, solve)
from states import corner_state, run_state

logger = logging.getLogger("srcube.cli")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_DOMAIN = 4
EXIT_BANDS = 5


def cmd_solve(args) -> int:
    cfg = helpers.load_config(args.config)
    spec = helpers.spec_from_config(cfg, threads=run_state['threads'])
    sol = solve(spec)

    out = cfg["outputs"]
    save_dir = helpers.make_run_dir(directory=out["directory"])
    save_solution(sol, os.path.join(save_dir, out["solution"]))
    helpers.write_json(sol.report(), os.path.join(save_dir, out["report"]))
    if sol.residual is not None:
        df = helpers.points_frame(sol.residual.points, sol.residual.values)
        helpers.write_csv(df, os.path.join(save_dir, out["collocation"]))
    logger.info("[i] outputs in %s", save_dir)
    return EXIT_OK


def cmd_eval(args) -> int:
    sol = load_solution(args.solution)
    df = helpers.read_points_csv(args.points)
    pts = df[["x", "y", "z"]].to_numpy(dtype=float)
    valid = np.isfinite(pts).all(axis=1)
    inside = np.array([ok and is_strictly_interior(p) for ok, p in zip(valid, pts)], dtype=bool)
    values = np.full(len(pts), np.nan)
    if inside.any():
        values[inside] = evaluate_many(sol, pts[inside], run_state['threads'])
    status = ["ok" if ok else "error: not strictly inside the cube" if good else "error: invalid coordinates"
              for ok, good in zip(inside, valid)]
    frame = helpers.points_frame(pts, values, status)
    text = helpers.write_csv(frame, args.out)
    if text is not None:
        sys.stdout.write(text)
    if not inside.all():
        logger.warning("[!] %d of %d rows invalid or outside the open cube", int((~inside).sum()), len(pts))
        return EXIT_DOMAIN
    return EXIT_OK


def cmd_table1(args) -> int:
    targets = ("u1", "u2")
    backends = ("mfs", "poly") if args.n == 5 else ("mfs",)
    specs = [ProblemSpec(BoundaryData.harmonic(t), n=args.n, backend=b, estimate_error=False)
             for b in backends for t in targets]
    rows = compare_backends(specs)
    bad = check_bands(rows, args.n)
    if args.json:
        print(json.dumps({"n": args.n, "rows": rows,
                          "violations": [list(v) for v in bad]}, indent=2))
    else:
        print(pd.DataFrame(rows).to_string(index=False, float_format=lambda v: f"{v:.3e}"))
        for backend, target, quantity, value, lo, hi in bad:
            print(f"[!] {backend} {target} {quantity} {value:.3e} outside [{lo:.1e}, {hi:.1e}]")
        print("[i] all cells within bands" if not bad else f"[!] {len(bad)} band violation(s)")
    return EXIT_BANDS if bad else EXIT_OK


def _parse_corner(text: str):
    try:
        corner = tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"--corner expects x,y,z, got {text!r}") from exc
    if len(corner) != 3:
        raise ConfigError(f"--corner expects three coordinates, got {text!r}")
    return corner


def cmd_corner(args) -> int:
    corner = _parse_corner(args.corner)
    try:
        corner_slice_points(corner, args.distance, args.resolution)
    except GeometryError as exc:
        raise ConfigError(str(exc)) from exc
    sol = load_solution(args.solution)
    samples = corner_slice(sol, corner, args.distance, args.resolution, run_state['threads'])
    frame = helpers.points_frame([p for p, _ in samples], [v for _, v in samples])
    text = helpers.write_csv(frame, args.out)
    if text is not None:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Singular-regular Laplace solver on the unit cube.")
    parser.add_argument('--threads', type=int, default=run_state['threads'], help='Worker threads for point batches.')
    parser.add_argument('--seed', type=int, default=run_state['seed'], help='Reserved; no stochastic step uses it.')
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('-v', '--verbose', action='store_true', help='Debug logging.')
    verbosity.add_argument('-q', '--quiet', action='store_true', help='Warnings and errors only.')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('solve', help='Run the S-R procedure from a JSON config.')
    p.add_argument('--config', required=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser('eval', help='Evaluate a saved solution at points from a CSV file.')
    p.add_argument('--solution', required=True)
    p.add_argument('--points', required=True)
    p.add_argument('--out', default=None, help='Output CSV (default: stdout).')
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser('table1', help='Compare the MFS and polynomial backends on closed-form targets.')
    p.add_argument('--n', type=int, choices=(5, 7), default=5)
    p.add_argument('--json', action='store_true')
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser('corner', help='Sample a saved solution on a triangular section near a corner.')
    p.add_argument('--solution', required=True)
    p.add_argument('--corner', default=",".join(str(c) for c in corner_state['corner']))
    p.add_argument('--distance', type=float, default=corner_state['distance'])
    p.add_argument('--resolution', type=int, default=corner_state['resolution'])
    p.add_argument('--out', default=None, help='Output CSV (default: stdout).')
    p.set_defaults(func=cmd_corner)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="[%(name)s] %(message)s", stream=sys.stderr, force=True)

    if args.threads < 1:
        logger.error("[!] --threads must be >= 1")
        return EXIT_CONFIG
    run_state['threads'] = args.threads
    run_state['seed'] = args.seed
    np.random.seed(args.seed)

    try:
        return args.func(args)
    except ConfigError as exc:
        logger.error("[!] %s", exc)
        return EXIT_CONFIG
    except SRCubeError as exc:
        logger.error("[!] %s: %s", type(exc).__name__, exc)
        return EXIT_NUMERICAL


if __name__ == '__main__':
    sys.exit(main())
