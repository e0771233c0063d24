"""Command-line harness: configure a run, stream per-round metrics to CSV.

The CSV (`round,elapsed_s,epochs,mse`, one line per round, flushed as rounds
complete) is the whole reporting contract; plotting epochs-vs-time is left
to whatever tool consumes the file.  Averaging repeated runs is a shell
loop, not a built-in - see README.md.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from typing import IO, Iterable

from .ann import GradientMode
from .datagen import Fixed, Seeded
from .protocol import TransportError
from .runtime import (
    Duration,
    ExperimentConfig,
    Mode,
    RoundMetrics,
    Rounds,
    RoundProtocolError,
    run,
)

CSV_HEADER = "round,elapsed_s,epochs,mse"


@dataclass(frozen=True)
class CliInvocation:
    config: ExperimentConfig
    out_path: str


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fedsim",
        description="Run a federated training experiment and record per-round metrics.",
    )
    p.add_argument("--mode", choices=["concurrent", "distributed"], default="concurrent")
    p.add_argument("--clients", type=int, default=10, metavar="N")
    p.add_argument("--subset", type=int, default=None, metavar="K",
                   help="clients selected per round (default: all)")
    p.add_argument("--samples", type=int, default=250, metavar="N",
                   help="fresh samples per client per round")
    p.add_argument("--eta", type=float, default=1.0, metavar="X")
    p.add_argument("--gradient-mode", choices=["classic", "chained"], default="chained")
    p.add_argument("--rounds", type=int, default=None, metavar="R")
    p.add_argument("--duration", type=float, default=None, metavar="S",
                   help="wall-clock stop condition in seconds (default 500)")
    p.add_argument("--seed", type=int, default=0, metavar="U64")
    p.add_argument("--listen", default=None, metavar="ADDR",
                   help="host:port to serve workers on (distributed mode)")
    p.add_argument("--out", default="metrics.csv", metavar="PATH",
                   help="metrics CSV path, '-' for stdout")
    p.add_argument("--worker-cmd", default=None, metavar="CMD",
                   help="worker spawn template; {address} {client_id} {seed} "
                        "placeholders, or appended positionally")
    p.add_argument("--local-epochs", type=int, default=1, metavar="E")
    p.add_argument("--init", choices=["fixed", "seeded"], default="fixed",
                   help="initial weights: the documented constants, or drawn from --seed")
    return p


def parse_args(argv: list[str]) -> CliInvocation:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.rounds is not None and args.duration is not None:
        parser.error("--rounds and --duration are mutually exclusive")
    if args.mode == "distributed" and args.listen is None:
        parser.error("--mode distributed requires --listen")
    if args.rounds is not None:
        stop = Rounds(args.rounds)
    else:
        stop = Duration(args.duration if args.duration is not None else 500.0)
    try:
        config = ExperimentConfig(
            n_clients=args.clients,
            subset_size=args.subset,
            samples_per_round=args.samples,
            eta=args.eta,
            mode=Mode(args.mode),
            gradient_mode=GradientMode(args.gradient_mode),
            stop=stop,
            seed=args.seed,
            listen_address=args.listen,
            worker_cmd=args.worker_cmd,
            local_epochs=args.local_epochs,
            initial=Fixed() if args.init == "fixed" else Seeded(args.seed),
        )
    except ValueError as exc:
        parser.error(str(exc))
    return CliInvocation(config=config, out_path=args.out)


def format_metrics_row(m: RoundMetrics) -> str:
    return f"{m.round},{m.elapsed_s:.9g},{m.epochs},{m.mse:.9g}"


def emit_metrics(metrics: Iterable[RoundMetrics], fh: IO[str]) -> None:
    """Write the full CSV for an already-collected metric sequence."""
    fh.write(CSV_HEADER + "\n")
    for m in metrics:
        fh.write(format_metrics_row(m) + "\n")
    fh.flush()


def load_metrics_csv(path: str) -> list[RoundMetrics]:
    rows = []
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"unexpected metrics header {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            r, elapsed, epochs, mse = line.split(",")
            rows.append(
                RoundMetrics(
                    round=int(r), elapsed_s=float(elapsed), epochs=int(epochs), mse=float(mse)
                )
            )
    return rows


def main(argv: list[str] | None = None) -> int:
    invocation = parse_args(sys.argv[1:] if argv is None else argv)

    if invocation.out_path == "-":
        fh = sys.stdout
        close = False
    else:
        try:
            fh = open(invocation.out_path, "w", encoding="ascii")
        except OSError as exc:
            print(f"fedsim: cannot write {invocation.out_path}: {exc}", file=sys.stderr)
            return 1
        close = True

    def on_round(m: RoundMetrics) -> None:
        fh.write(format_metrics_row(m) + "\n")
        fh.flush()

    try:
        fh.write(CSV_HEADER + "\n")
        fh.flush()
        run(invocation.config, on_round=on_round)
    except (TransportError, RoundProtocolError, OSError, ValueError) as exc:
        print(f"fedsim: run aborted: {exc}", file=sys.stderr)
        return 1
    finally:
        if close:
            fh.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
