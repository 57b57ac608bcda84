# main.py
"""
PHC network simulation and real-time facility assignment - command line.

    python main.py simulate  --config configs/baseline.yaml --reps 50
    python main.py assign    --config configs/rthfa_aqt.yaml --predictor aqt --compliance 1.0
    python main.py dataset   --config configs/baseline.yaml --samples 50000
    python main.py train-eval --dataset results/baseline/dataset.csv
    python main.py calibrate --config configs/symmetric.yaml
    python main.py sweep     --config configs/rthfa_actual.yaml
    python main.py report    --results results

Exit codes: 0 success, 1 configuration error, 2 runtime failure, 3 command-line
usage error (argparse prints the usage).
"""

import argparse
import logging
import os
import sys
from pathlib import Path

from dotenv import load_dotenv

from phc_hfa.ai import LosKnnModel, generate_dataset, read_samples, train_and_evaluate, write_samples
from phc_hfa.errors import ConfigurationError, PhcSimulationError
from phc_hfa.experiments import (
    calibrate,
    compliance_sweep,
    env_jobs,
    load_model,
    load_scenario,
    make_router,
    merge_reports,
    run_scenario,
    write_csv,
    write_scenario,
    write_sweep,
)

logger = logging.getLogger("phc_hfa")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
EXIT_USAGE = 3

DEFAULT_CONFIGS = {
    "simulate": "configs/baseline.yaml",
    "assign": "configs/rthfa_aqt.yaml",
    "dataset": "configs/baseline.yaml",
    "train-eval": "configs/baseline.yaml",
    "calibrate": "configs/rthfa_aqt.yaml",
    "sweep": "configs/rthfa_aqt.yaml",
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=None, help="scenario YAML file")
    common.add_argument("--seed", type=int, default=None, help="master seed (overrides the file)")
    common.add_argument("--reps", type=int, default=None, help="number of replications (overrides the file)")
    common.add_argument("--out", type=str, default=None, help="output directory")
    common.add_argument("--jobs", type=int, default=None, help="parallel replications (default PHC_JOBS or 1)")
    common.add_argument("--trace", type=str, default=None, help="write the event trace of replication 0 here")

    parser = argparse.ArgumentParser(
        prog="phc_hfa",
        description="PHC network simulation with real-time LOS prediction and facility assignment",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    commands = parser.add_subparsers(dest="command", required=True)

    commands.add_parser("simulate", parents=[common], help="baseline operational outcomes")

    assign = commands.add_parser("assign", parents=[common], help="real-time facility assignment")
    assign.add_argument("--predictor", choices=["actual", "aqt", "simml"], default=None)
    assign.add_argument("--compliance", type=float, default=None)
    assign.add_argument("--model", type=str, default=None, help="KNN model file for the simml predictor")

    dataset = commands.add_parser("dataset", parents=[common], help="generate Sim-ML training samples")
    dataset.add_argument("--samples", type=int, default=None, help="number of samples (default: all replications)")

    train = commands.add_parser("train-eval", parents=[common], help="fit the KNN and report MAPE tables")
    train.add_argument("--dataset", type=str, default=None, help="dataset CSV (generated when omitted)")
    train.add_argument("--k", type=int, default=None)
    train.add_argument("--split", type=float, default=None, help="training share")
    train.add_argument("--model", type=str, default=None, help="where to save the fitted model")

    calibrate_cmd = commands.add_parser("calibrate", parents=[common], help="effective interarrival times")
    calibrate_cmd.add_argument("--compliance", type=float, default=None)
    calibrate_cmd.add_argument("--predictor", choices=["actual", "aqt", "simml"], default=None)
    calibrate_cmd.add_argument("--model", type=str, default=None)

    sweep = commands.add_parser("sweep", parents=[common], help="compliance sensitivity")
    sweep.add_argument("--rates", type=float, nargs="+", default=None)
    sweep.add_argument("--predictor", choices=["actual", "aqt", "simml"], default=None)
    sweep.add_argument("--model", type=str, default=None)

    report = commands.add_parser("report", parents=[common], help="merge summaries into one markdown file")
    report.add_argument("--results", type=str, default=None, help="results directory (default --out or PHC_OUTPUT_DIR)")
    return parser


def _scenario(args, **assignment):
    path = args.config or DEFAULT_CONFIGS[args.command]
    scenario = load_scenario(path)
    return scenario.with_overrides(seed=args.seed, replications=args.reps, output_dir=args.out, **assignment)


def _out_dir(args, scenario):
    return args.out or os.path.join(scenario.output_dir, scenario.name)


def _jobs(args):
    if args.jobs is not None:
        if args.jobs < 1:
            raise ConfigurationError(f"--jobs must be at least 1, got {args.jobs}")
        return args.jobs
    return env_jobs()


def _model(scenario, path):
    if path:
        return LosKnnModel.load(path)
    return load_model(scenario)


def cmd_simulate(args):
    scenario = _scenario(args)
    if scenario.assignment is not None:
        logger.info("Ignoring the assignment block: simulate runs the no-assignment baseline")
        scenario = scenario.model_copy(update={"assignment": None})
    result = run_scenario(scenario, jobs=_jobs(args), trace_path=args.trace)
    write_scenario(result, _out_dir(args, scenario))
    return result


def cmd_assign(args):
    scenario = _scenario(args, compliance=args.compliance, predictor=args.predictor)
    model = _model(scenario, args.model)
    result = run_scenario(scenario, jobs=_jobs(args), model=model, trace_path=args.trace)
    write_scenario(result, _out_dir(args, scenario))
    return result


def cmd_dataset(args):
    scenario = _scenario(args)
    samples = args.samples if args.samples is not None else scenario.simml.samples
    router_factory = None
    if scenario.assignment is not None:
        model = load_model(scenario)
        router_factory = lambda _: make_router(scenario, model)  # noqa: E731
    dataset = generate_dataset(scenario, n_target=samples, router_factory=router_factory)
    path = os.path.join(_out_dir(args, scenario), "dataset.csv")
    os.makedirs(os.path.dirname(path), exist_ok=True)
    write_samples(dataset, path)
    logger.info(f"Wrote {len(dataset)} samples to {path}")
    return path


def cmd_train_eval(args):
    scenario = _scenario(args)
    out = _out_dir(args, scenario)
    if args.dataset:
        dataset = read_samples(args.dataset)
    else:
        dataset = generate_dataset(scenario, n_target=scenario.simml.samples)
    k = args.k if args.k is not None else scenario.simml.k
    split = args.split if args.split is not None else scenario.simml.train_share
    model, _, flow, stations = train_and_evaluate(
        dataset, k=k, split=split, seed=scenario.simml.split_seed, filter_outliers=scenario.simml.filter_outliers
    )
    model.save(args.model)
    write_csv(flow, os.path.join(out, "mape_flowwise.csv"))
    write_csv(stations, os.path.join(out, "mape_stationwise.csv"))
    return model


def cmd_calibrate(args):
    scenario = _scenario(args, compliance=args.compliance, predictor=args.predictor)
    calibration = calibrate(scenario, _model(scenario, args.model))
    calibration.write(os.path.join(_out_dir(args, scenario), "lambda_trace.csv"))
    for name, value in zip(scenario.facility_names, calibration.lambda_eff):
        print(f"{name}: effective interarrival {value:.3f} min")
    return calibration


def cmd_sweep(args):
    scenario = _scenario(args, predictor=args.predictor)
    table, results = compliance_sweep(scenario, rates=args.rates, jobs=_jobs(args), model=_model(scenario, args.model))
    write_sweep(table, results, _out_dir(args, scenario))
    return table


def cmd_report(args):
    results_dir = args.results or args.out or os.getenv("PHC_OUTPUT_DIR", "results")
    if not Path(results_dir).is_dir():
        raise ConfigurationError(f"results directory {results_dir} does not exist")
    path = merge_reports(results_dir)
    print(f"Report written to {path}")
    return path


COMMANDS = {
    "simulate": cmd_simulate,
    "assign": cmd_assign,
    "dataset": cmd_dataset,
    "train-eval": cmd_train_eval,
    "calibrate": cmd_calibrate,
    "sweep": cmd_sweep,
    "report": cmd_report,
}


def main(argv=None):
    load_dotenv()
    logging.basicConfig(
        level=os.getenv("PHC_LOG_LEVEL", "INFO").upper(),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        # --help exits 0
        if e.code in (0, None):
            raise
        return EXIT_USAGE
    try:
        COMMANDS[args.command](args)
    except ConfigurationError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except PhcSimulationError as e:
        logger.error(f"Run failed: {e}")
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
