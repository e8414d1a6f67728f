"""Command line interface: design, fit, predict and bench subcommands"""

import argparse
import logging
import os
import sys

import numpy as np
import pandas as pd

from sparse_grid_gp import constant, settings
from sparse_grid_gp.dense_oracle import dense_fit, dense_mle, dense_predict
from sparse_grid_gp.designs import (build_lattice, build_lhs,
                                    build_sparse_grid, export_design_csv,
                                    lattice_axis, load_design,
                                    resolve_schedules)
from sparse_grid_gp.exceptions import ConfigError, SparseGridError
from sparse_grid_gp.items import MleResult
from sparse_grid_gp.kernels import MeanBasis, SeparableKernel
from sparse_grid_gp.likelihood import fit_mle
from sparse_grid_gp.main import Bench
from sparse_grid_gp.pipelines import ReportPipeline
from sparse_grid_gp.bench import run_study
from sparse_grid_gp.sg_predictor import SparseGridPredictor
from sparse_grid_gp.utils import (configure_logging, read_config, read_json,
                                  read_observations_csv, read_points_csv,
                                  write_frame, write_json)

logger = logging.getLogger(__name__)


def _basis(name: str, d: int) -> MeanBasis:
    if name == "constant":
        return MeanBasis.constant()
    if name == "linear":
        return MeanBasis.linear(d)
    raise ConfigError(f"unknown mean basis {name!r}")


def cmd_design(args) -> None:
    if args.lhs is not None:
        design = build_lhs(args.lhs, args.dim, args.seed)
    elif args.lattice is not None:
        design = build_lattice([lattice_axis(args.lattice)] * args.dim)
    else:
        if args.eta is None:
            raise ConfigError("a sparse grid design needs --eta")
        design = build_sparse_grid(resolve_schedules(args.schedule, args.dim, args.eta), args.eta)
    export_design_csv(design, args.out)
    n = design.N if hasattr(design, "N") else len(design)
    print(f"wrote {n} points to {args.out}")


def cmd_fit(args) -> None:
    points, design = load_design(args.design)
    y = read_observations_csv(args.obs, points.shape[0])
    basis = _basis(args.basis, points.shape[1])
    F = basis(points)
    bracket = tuple(args.phi_bracket)
    if design is not None:
        result = fit_mle(design, F, y, bracket, args.nu, args.nugget)
    else:
        logger.warning("%s has no sparse grid metadata; fitting with the dense oracle", args.design)
        result = dense_mle(points, F, y, bracket, args.nu, args.nugget)
    report = result.to_dict()
    report["model"] = {
        "design": os.path.abspath(args.design),
        "obs": os.path.abspath(args.obs),
        "basis": args.basis,
    }
    write_json(args.out, report)
    print(f"phi_hat={result.phi_hat:.6g} sigma2_hat={result.sigma2_hat:.6g} loglik={result.loglik:.10g}")


def cmd_predict(args) -> None:
    report = read_json(args.fit)
    result = MleResult.from_dict(report)
    model = report.get("model")
    if not model:
        raise ConfigError(f"{args.fit} has no model section; rerun fit")
    points, design = load_design(model["design"])
    y = read_observations_csv(model["obs"], points.shape[0])
    basis = _basis(model["basis"], points.shape[1])
    _, probes = read_points_csv(args.points)
    beta = np.asarray(result.beta_hat, dtype=float)

    # with sigma2_hat = 0 the data lie in the span of the basis: variance is 0
    sigma2 = result.sigma2_hat if result.sigma2_hat > 0 else 1.0
    scale = 1.0 if result.sigma2_hat > 0 else 0.0
    kernel = SeparableKernel.isotropic(points.shape[1], result.nu, result.phi_hat, sigma2,
                                       nugget=result.nugget)
    if design is not None:
        predictor = SparseGridPredictor(design, kernel, lambda X: basis(X) @ beta).fit(y)
        mean, variance = predictor.predict(probes)
    else:
        mean, variance = dense_predict(dense_fit(points, kernel, basis, y, beta=beta), probes)
    frame = pd.DataFrame({
        "id": np.arange(probes.shape[0]),
        "mean": np.atleast_1d(mean),
        "variance": scale * np.atleast_1d(variance),
    }, columns=constant.PREDICTION_COLUMNS)
    write_frame(args.out, frame)
    print(f"wrote {probes.shape[0]} predictions to {args.out}")


def cmd_bench(args) -> None:
    defaults = settings.STUDY_CONFIGS[args.study]
    config = read_config(args.config, defaults) if args.config else dict(defaults)
    if args.in_process:
        pipeline = ReportPipeline(args.out)
        for item in run_study(args.study, config):
            pipeline.process_item(item)
        reports = pipeline.items
        pipeline.close()
    else:
        reports = Bench({"type": args.study, "config": config}, output=args.out).run()
    print(f"wrote {len(reports)} report rows to {args.out}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sparse-grid-gp",
                                     description="Gaussian process kriging on sparse grid designs")
    parser.add_argument("--log-level", default="WARNING",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    commands = parser.add_subparsers(dest="command", required=True)

    design = commands.add_parser("design", help="build a design and write it as CSV")
    design.add_argument("--schedule", default=settings.DEFAULT_SCHEDULE,
                        help=f"one of {', '.join(constant.SCHEDULE_NAMES)}, or a schedule file")
    design.add_argument("--dim", type=int, required=True)
    design.add_argument("--eta", type=int)
    design.add_argument("--lhs", type=int, metavar="N", help="Latin hypercube of N points instead")
    design.add_argument("--lattice", type=int, metavar="n", help="lattice with n points per axis instead")
    design.add_argument("--seed", type=int, default=0)
    design.add_argument("--out", required=True)
    design.set_defaults(func=cmd_design)

    fit = commands.add_parser("fit", help="maximum likelihood fit of beta, sigma2 and phi")
    fit.add_argument("--design", required=True)
    fit.add_argument("--obs", required=True)
    fit.add_argument("--nu", type=float, default=2.5)
    fit.add_argument("--phi-bracket", type=float, nargs=2, default=list(settings.PHI_BRACKET),
                     metavar=("LO", "HI"))
    fit.add_argument("--nugget", type=float, default=settings.NUGGET)
    fit.add_argument("--basis", choices=["constant", "linear"], default="constant")
    fit.add_argument("--out", required=True)
    fit.set_defaults(func=cmd_fit)

    predict = commands.add_parser("predict", help="kriging mean and variance at new points")
    predict.add_argument("--fit", required=True)
    predict.add_argument("--points", required=True)
    predict.add_argument("--out", required=True)
    predict.set_defaults(func=cmd_predict)

    bench = commands.add_parser("bench", help="run a benchmark study")
    bench.add_argument("study", choices=sorted(settings.STUDY_CONFIGS))
    bench.add_argument("--config")
    bench.add_argument("--out", required=True)
    bench.add_argument("--in-process", action="store_true",
                       help="run in this process instead of a child process")
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        args.func(args)
    except SparseGridError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0
