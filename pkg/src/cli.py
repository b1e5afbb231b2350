"""
Command-line entry point for the hbsa simulator
Verification sweeps, single classifications and the two protocols
"""

import argparse
import logging
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import yaml
from jinja2 import StrictUndefined, Template

import hbsa
import reports
from errors import NormalizationError, SimulationError
from hbsa import HyperBellLabel, classify, prepare_hyper_bell
from protocols import TwoQubitPhotonState, swap, teleport, uncorrected_mean_fidelity
from reports import Report, render
from spbsa import derive_detector_map
from statevec import NORM_TOLERANCE, BranchChoice, BranchMode
from utils import SplitMix64, parse_seed, validate_config, write_atomically

FORMATS = ("text", "json", "csv")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

# Command-line coefficients within this tolerance are accepted, then rescaled
COEFFICIENT_TOLERANCE = 1e-6


class UsageError(Exception):
    """Bad command-line input, mapped to exit code 2"""


def load_config():
    """Load configuration from resources/config.yaml, rendering {{ }} values from the environment"""
    config_path = Path(__file__).parent.parent / "resources" / "config.yaml"
    with open(config_path) as f:
        config = yaml.safe_load(f)
    validate_config(config)
    return _render_values(config)


def _render_values(value):
    if isinstance(value, dict):
        return {k: _render_values(v) for k, v in value.items()}
    if isinstance(value, str) and "{{" in value and "}}" in value:
        return Template(value, undefined=StrictUndefined).render(**os.environ)
    return value


@dataclass(frozen=True)
class RunConfig:
    command: str
    seed: int
    mode: BranchMode
    format: str
    trials: int
    output: Path | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise UsageError(f"--trials must be at least 1, got {self.trials}")

    def choice(self, offset: int = 0) -> BranchChoice:
        """Branch choice for one trial; sampling trials are seeded with seed + offset"""
        if self.mode is BranchMode.EXHAUSTIVE:
            return BranchChoice.exhaustive()
        return BranchChoice.sampling(self.seed + offset)


def build_config(args: argparse.Namespace, config: dict) -> RunConfig:
    """
    Merge command-line arguments over the config file defaults

    Args:
        args: Parsed arguments
        config: Loaded configuration

    Returns:
        The run configuration
    """
    defaults = config["defaults"]
    trials = args.trials
    if trials is None:
        trials = config.get(args.command, {}).get("trials", defaults["trials"])
    try:
        seed = parse_seed(args.seed if args.seed is not None else defaults["seed"])
    except ValueError as e:
        raise UsageError(str(e)) from None
    return RunConfig(
        command=args.command,
        seed=seed,
        mode=BranchMode(args.mode or config["modes"][args.command]),
        format=args.format or defaults["format"],
        trials=int(trials),
        output=Path(args.output) if args.output else None,
    )


def run_verify(cfg: RunConfig) -> tuple[Report, int]:
    """
    Classify every prepared hyperentangled Bell state and check both tables

    Args:
        cfg: Run configuration

    Returns:
        Report and exit code
    """
    logging.info("Starting verification sweep")
    started = time.perf_counter()

    rows = []
    for i, label in enumerate(HyperBellLabel.all()):
        try:
            result = classify(prepare_hyper_bell(label), cfg.choice(i))
            records = [b.outcome for b in result.branches]
            rows.append(reports.verify_row(label, records, str(result.label)))
        except (SimulationError, KeyError) as e:
            logging.error(f"{label}: {type(e).__name__}: {e}")
            rows.append(reports.failed_row(label, e))

    tables = {}
    for name, check in (("table1", hbsa.verify_table1), ("table2", hbsa.verify_table2)):
        try:
            check()
            tables[name] = True
        except (SimulationError, KeyError) as e:
            logging.error(f"{name}: {type(e).__name__}: {e}")
            tables[name] = False

    frame = reports.verify_frame(rows)
    passed = int(frame["passed"].sum())
    summary = {"passed": passed, "total": len(frame), **tables}
    logging.info(f"Sweep finished in {time.perf_counter() - started:.3f} s: {passed}/{len(frame)}")

    ok = passed == len(frame) and all(tables.values())
    return Report(cfg.command, cfg.seed, frame, summary), EXIT_OK if ok else EXIT_FAILED


def run_classify(cfg: RunConfig, label: HyperBellLabel) -> tuple[Report, int]:
    """
    Prepare one state, classify it and report the measurement record

    Args:
        cfg: Run configuration
        label: State to prepare

    Returns:
        Report and exit code
    """
    try:
        result = classify(prepare_hyper_bell(label), cfg.choice())
    except (SimulationError, KeyError) as e:
        logging.error(f"{label}: {type(e).__name__}: {e}")
        frame = reports.classify_frame([])
        summary = {"label": str(label), "classified": type(e).__name__, "passed": False}
        return Report(cfg.command, cfg.seed, frame, summary), EXIT_FAILED

    frame = reports.classify_frame([(b, str(result.label)) for b in result.branches])
    passed = result.label == label
    summary = {"label": str(label), "classified": str(result.label), "passed": passed}
    return Report(cfg.command, cfg.seed, frame, summary), EXIT_OK if passed else EXIT_FAILED


def run_teleport(
    cfg: RunConfig, coefficients: tuple[complex, complex, complex, complex] | None = None
) -> tuple[Report, int]:
    """
    Teleportation trials, with random inputs unless coefficients are given

    Trial t draws its input (and its sampled branch) from seed + t.

    Args:
        cfg: Run configuration
        coefficients: (alpha, beta, delta, eta) of an explicit input

    Returns:
        Report and exit code
    """
    explicit = None
    if coefficients is not None:
        explicit = normalized_input(*coefficients)

    logging.info(f"Running {cfg.trials} teleportation trials")
    trials = []
    uncorrected = []
    for t in range(cfg.trials):
        seed = cfg.seed + t
        rng = SplitMix64(seed)
        input_state = explicit if explicit is not None else TwoQubitPhotonState.random(rng)
        if cfg.mode is BranchMode.SAMPLING:
            choice = BranchChoice(BranchMode.SAMPLING, rng)
        else:
            choice = BranchChoice.exhaustive()
        branches = teleport(input_state, choice)
        trials.append((seed, branches))
        if choice.is_exhaustive:
            uncorrected.append(uncorrected_mean_fidelity(branches))

    frame = reports.teleport_frame(trials)
    fidelities = [b.fidelity for _, branches in trials for b in branches]
    passed = all(f >= 1.0 - NORM_TOLERANCE for f in fidelities)
    summary = {
        "trials": cfg.trials,
        "branches": len(frame),
        "mean_fidelity": round(sum(fidelities) / len(fidelities), reports.DIGITS),
        "min_fidelity": round(min(fidelities), reports.DIGITS),
        "passed": passed,
    }
    if uncorrected:
        summary["uncorrected_mean_fidelity"] = round(
            sum(uncorrected) / len(uncorrected), reports.DIGITS
        )
    return Report(cfg.command, cfg.seed, frame, summary), EXIT_OK if passed else EXIT_FAILED


def normalized_input(
    alpha: complex, beta: complex, delta: complex, eta: complex
) -> TwoQubitPhotonState:
    """
    Accept coefficients normalized per degree of freedom within COEFFICIENT_TOLERANCE

    Args:
        alpha, beta: Polarization amplitudes
        delta, eta: Time-bin amplitudes

    Returns:
        The input state, rescaled to unit norm per degree of freedom
    """
    try:
        TwoQubitPhotonState(alpha, beta, delta, eta, tolerance=COEFFICIENT_TOLERANCE)
    except NormalizationError as e:
        raise UsageError(str(e)) from None
    pol = (abs(alpha) ** 2 + abs(beta) ** 2) ** 0.5
    tb = (abs(delta) ** 2 + abs(eta) ** 2) ** 0.5
    return TwoQubitPhotonState(alpha / pol, beta / pol, delta / tb, eta / tb)


def run_swap(cfg: RunConfig) -> tuple[Report, int]:
    """
    Entanglement swapping, all 16 branches or cfg.trials sampled ones

    Args:
        cfg: Run configuration

    Returns:
        Report and exit code
    """
    try:
        if cfg.mode is BranchMode.EXHAUSTIVE:
            branches = swap(cfg.choice())
        else:
            branches = [b for t in range(cfg.trials) for b in swap(cfg.choice(t))]
    except (SimulationError, KeyError) as e:
        logging.error(f"Swap failed: {type(e).__name__}: {e}")
        frame = reports.swap_frame([])
        return Report(cfg.command, cfg.seed, frame, {"error": type(e).__name__}), EXIT_FAILED

    frame = reports.swap_frame(branches)
    matches = int(frame["match"].sum())
    summary = {
        "branches": len(frame),
        "matches": matches,
        "total_probability": round(float(frame["probability"].sum()), reports.DIGITS),
        "passed": matches == len(frame),
    }
    code = EXIT_OK if summary["passed"] else EXIT_FAILED
    return Report(cfg.command, cfg.seed, frame, summary), code


def run_table(cfg: RunConfig) -> tuple[Report, int]:
    """
    Both tables as transcribed next to their simulated reconstruction

    Args:
        cfg: Run configuration

    Returns:
        Report and exit code; the diff section lists mismatching rows
    """
    try:
        derived1 = hbsa.derive_table1()
        derived2 = hbsa.derive_table2()
        detector_map = derive_detector_map()
    except (SimulationError, KeyError) as e:
        logging.error(f"Table derivation failed: {type(e).__name__}: {e}")
        frame = reports.table_frame([], [])
        return Report(cfg.command, cfg.seed, frame, {"error": type(e).__name__}), EXIT_FAILED

    frame = reports.table_frame(derived1, derived2)
    diff = frame[~frame["match"]]
    map_frame = reports.detector_map_frame(detector_map)
    summary = {
        "rows": len(frame),
        "mismatches": len(diff),
        "detector_map": map_frame.to_dict(orient="records"),
    }
    sections = {"detector map": map_frame}
    if len(diff):
        sections["diff"] = diff
    report = Report(cfg.command, cfg.seed, frame, summary, sections)
    return report, EXIT_OK if diff.empty else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=str, help="Seed, decimal or 0x hex (default: HBSA_SEED)")
    common.add_argument("--mode", choices=[m.value for m in BranchMode], help="Branch mode")
    common.add_argument("--format", choices=FORMATS, help="Report format")
    common.add_argument("--trials", type=int, help="Number of trials")
    common.add_argument("--output", type=str, help="Write the report to this file")
    common.add_argument("--verbose", action="store_true", help="Log debug messages")

    parser = argparse.ArgumentParser(
        prog="hbsa", description="Hyperentangled Bell-state analysis simulator"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    subparsers.add_parser(
        "verify", parents=[common], help="Classify all 16 states and check both tables"
    )
    classify_parser = subparsers.add_parser("classify", parents=[common], help="Classify one state")
    classify_parser.add_argument("pol", help="Polarization label, e.g. PhiP-")
    classify_parser.add_argument("tb", help="Time-bin label, e.g. PhiT-")
    teleport_parser = subparsers.add_parser(
        "teleport", parents=[common], help="Teleportation trials"
    )
    for name in ("alpha", "beta", "delta", "eta"):
        teleport_parser.add_argument(f"--{name}", type=complex, help=f"Input amplitude {name}")
    subparsers.add_parser("swap", parents=[common], help="Entanglement swapping")
    subparsers.add_parser(
        "table", parents=[common], help="Tables I and II, transcribed and simulated"
    )
    return parser


def run(args: argparse.Namespace) -> int:
    """
    Execute one command

    Args:
        args: Parsed arguments

    Returns:
        Process exit code
    """
    cfg = build_config(args, load_config())
    logging.info(f"Running {cfg.command} (seed {cfg.seed}, {cfg.mode}, {cfg.format})")

    if cfg.command == "verify":
        report, code = run_verify(cfg)
    elif cfg.command == "classify":
        try:
            label = HyperBellLabel.parse(f"{args.pol} {args.tb}")
        except ValueError as e:
            raise UsageError(str(e)) from None
        report, code = run_classify(cfg, label)
    elif cfg.command == "teleport":
        coefficients = (args.alpha, args.beta, args.delta, args.eta)
        given = [c is not None for c in coefficients]
        if any(given) and not all(given):
            raise UsageError("--alpha, --beta, --delta and --eta must be given together")
        report, code = run_teleport(cfg, coefficients if all(given) else None)
    elif cfg.command == "swap":
        report, code = run_swap(cfg)
    else:
        report, code = run_table(cfg)

    content = render(report, cfg.format)
    if cfg.output:
        write_atomically(cfg.output, content)
        logging.info(f"Report written to {cfg.output}")
    else:
        sys.stdout.write(content)
    return code


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK

    # stdout carries the report, so logs go to stderr
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s - %(levelname)s - %(message)s",
        handlers=[logging.StreamHandler(sys.stderr)],
        force=True,
    )

    try:
        return run(args)
    except UsageError as e:
        logging.error(str(e))
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
