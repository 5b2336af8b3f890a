"""Command-line entry points: exact, run, batch, plot, dump-hamiltonian.

Exit codes: 0 ok, 1 config error, 2 runtime failure, 3 batch finished with
at least one failed trial.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .controller import VqeTrace
from .errors import ConfigError
from .exact import ground_state_energy
from .harness import RunConfig, build_problem, emit_plot_data, reference_energy, run_batch, run_trial
from .lattice import write_hamiltonian_csv

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_FAILED_TRIALS = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _load_config(args) -> RunConfig:
    cfg = RunConfig.read(args.config) if args.config else RunConfig()
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.out is not None:
        changes["out_dir"] = args.out
    return cfg.replace(**changes) if changes else cfg


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_exact(args) -> int:
    cfg = _load_config(args)
    h = build_problem(cfg)
    res = ground_state_energy(h)
    print(f"E_gs = {res.energy!r}")
    print(f"residual = {res.residual_norm:.3e}")
    print(f"method = {res.method} dimension = {res.dimension}")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _load_config(args)
    h = build_problem(cfg)
    ground = reference_energy(cfg, h)
    res = run_trial(cfg, args.trial, h, ground)
    out = _out_dir(cfg)
    path = out / f"run_{args.trial:04d}.csv"
    res.trace.write_csv(path, {"mode": cfg.mode, "ground_energy": repr(ground), **res.summary()})
    print(f"success = {res.success}")
    print(f"cycles = {len(res.trace)}")
    print(f"final_relative_error = {res.final_relative_error:.6f}")
    print(f"final_J = {res.final_J:.6f}")
    print(f"trace = {path}")
    if res.error:
        print(f"error: {res.error}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_batch(args) -> int:
    cfg = _load_config(args)
    summary, results = run_batch(cfg)
    print(summary.dumps(), end="")
    if any(r.error for r in results):
        for i, r in enumerate(results):
            if r.error:
                print(f"trial {i}: {r.error}", file=sys.stderr)
    return EXIT_FAILED_TRIALS if summary.failed else EXIT_OK


def cmd_plot(args) -> int:
    cfg = _load_config(args)
    trace = VqeTrace.read_csv(args.trace)
    target = args.target if args.target is not None else reference_energy(cfg, build_problem(cfg))
    out = _out_dir(cfg) / (Path(args.trace).stem + "_plot.csv")
    for path in emit_plot_data(trace, target, out, svg=not args.no_svg):
        print(path)
    return EXIT_OK


def cmd_dump_hamiltonian(args) -> int:
    cfg = _load_config(args)
    h = build_problem(cfg)
    path = _out_dir(cfg) / "hamiltonian.csv"
    write_hamiltonian_csv(h, path)
    print(f"{len(h)} terms -> {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="master seed (overrides the config)")
    common.add_argument("--config", help="key = value config file")
    common.add_argument("--out", help="output directory (overrides the config)")

    parser = _Parser(prog="kagomelab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("exact", parents=[common], help="print E_gs and residual").set_defaults(fn=cmd_exact)
    p = sub.add_parser("run", parents=[common], help="run one experiment")
    p.add_argument("--trial", type=int, default=0, help="trial index used to derive the seed")
    p.set_defaults(fn=cmd_run)
    sub.add_parser("batch", parents=[common], help="run a batch of trials").set_defaults(fn=cmd_batch)
    p = sub.add_parser("plot", parents=[common], help="render a trace CSV")
    p.add_argument("trace", help="trace CSV written by run or batch")
    p.add_argument("--target", type=float, help="target energy (default: exact E_gs)")
    p.add_argument("--no-svg", action="store_true", help="write only the CSV")
    p.set_defaults(fn=cmd_plot)
    sub.add_parser("dump-hamiltonian", parents=[common], help="write the Pauli terms as CSV").set_defaults(
        fn=cmd_dump_hamiltonian
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
