"""Standalone training worker speaking the wire protocol.

Usage: ``fedsim-worker HOST:PORT CLIENT_ID SEED [--gradient-mode classic|chained]
[--samples N] [--local-epochs E]``.  The launcher passes the optional flags
only when they differ from the defaults, so alternative worker
implementations need only the three positional arguments to interoperate.

The worker connects, handshakes, then loops: decode an assignment, generate
fresh local data from its own seeded stream, train, reply with an update.
A SHUTDOWN frame ends the loop with exit status 0.
"""

from __future__ import annotations

import argparse
import socket
import sys

from . import datagen, protocol
from .ann import GradientMode, train_batch
from .protocol import Ack, Assignment, ProtocolErrorMsg, Shutdown, TransportError, Update
from .rng import Xoshiro256StarStar


def worker_main(
    address: str,
    client_id: int,
    seed: int,
    gradient_mode: GradientMode = GradientMode.CHAINED,
    samples_per_round: int = datagen.DEFAULT_SAMPLES_PER_ROUND,
    local_epochs: int = 1,
) -> int:
    host, _, port_s = address.rpartition(":")
    if not host or not port_s:
        print(f"worker: bad address {address!r}, want host:port", file=sys.stderr)
        return 2
    try:
        sock = socket.create_connection((host, int(port_s)), timeout=10.0)
    except OSError as exc:
        print(f"worker {client_id}: connect failed: {exc}", file=sys.stderr)
        return 1

    rng = Xoshiro256StarStar(seed)
    try:
        sock.settimeout(10.0)
        protocol.write_frame(
            sock, protocol.encode_hello(protocol.Hello(protocol.PROTOCOL_VERSION, client_id))
        )
        reply = protocol.decode_message(protocol.read_frame(sock))
        if isinstance(reply, ProtocolErrorMsg):
            print(
                f"worker {client_id}: handshake rejected (reason 0x{reply.reason:02X})",
                file=sys.stderr,
            )
            return 1
        if not isinstance(reply, Ack):
            print(f"worker {client_id}: expected ACK, got {reply!r}", file=sys.stderr)
            return 1
        sock.settimeout(None)

        while True:
            try:
                msg = protocol.decode_message(protocol.read_frame(sock))
            except protocol.ProtocolError as exc:
                protocol.write_frame(sock, protocol.encode_error(protocol.ERR_MALFORMED))
                print(f"worker {client_id}: malformed frame: {exc}", file=sys.stderr)
                return 1
            if isinstance(msg, Shutdown):
                return 0
            if not isinstance(msg, Assignment):
                protocol.write_frame(
                    sock, protocol.encode_error(protocol.ERR_PROTOCOL_VIOLATION)
                )
                print(f"worker {client_id}: unexpected {type(msg).__name__}", file=sys.stderr)
                return 1
            samples = datagen.gen_batch(rng, samples_per_round)
            weights = msg.model
            for _ in range(local_epochs):
                _, weights = train_batch(samples, weights, gradient_mode)
            update = Update(
                round=msg.round,
                client_id=client_id,
                model=weights,
                sample_count=len(samples),
            )
            protocol.write_frame(sock, protocol.encode_update(update))
    except TransportError as exc:
        print(f"worker {client_id}: {exc}", file=sys.stderr)
        return 1
    finally:
        sock.close()


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="fedsim-worker", description=__doc__)
    parser.add_argument("address", help="server address as host:port")
    parser.add_argument("client_id", type=int)
    parser.add_argument("seed", type=int, help="unsigned 64-bit stream seed")
    parser.add_argument(
        "--gradient-mode", choices=["classic", "chained"], default="chained"
    )
    parser.add_argument("--samples", type=int, default=datagen.DEFAULT_SAMPLES_PER_ROUND)
    parser.add_argument("--local-epochs", type=int, default=1)
    args = parser.parse_args(argv)
    return worker_main(
        args.address,
        args.client_id,
        args.seed,
        gradient_mode=GradientMode(args.gradient_mode),
        samples_per_round=args.samples,
        local_epochs=args.local_epochs,
    )


if __name__ == "__main__":
    sys.exit(main())
