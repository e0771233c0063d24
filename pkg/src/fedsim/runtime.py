"""The round engine: a server activity coordinating training clients.

One round = select a subset of clients, send each the global model, block
until every selected client has replied with its locally trained model, then
install the sample-count-weighted aggregate as the new global model.

Two transports carry the messages:

* Concurrent - each client is a thread with a private inbox queue; the
  server owns its own inbox that clients post updates to.  Mailbox message
  passing is the only communication; model values are immutable so nothing
  is shared.
* Distributed - each client is a separate worker process speaking the wire
  protocol over TCP (see protocol.py / PROTOCOL.md).

Update arrival order is nondeterministic in both transports, so aggregation
always proceeds in ascending client-id order; combined with the per-client
seed derivation this makes concurrent and distributed runs of the same
configuration bit-identical.
"""

from __future__ import annotations

import enum
import queue
import shlex
import socket
import subprocess
import sys
import threading
import time
from dataclasses import dataclass, field

from . import datagen, fedsgd, protocol
from .ann import GradientMode, ModelWeights, mse, train_batch
from .datagen import WeightInit
from .protocol import (
    Assignment,
    Hello,
    ProtocolErrorMsg,
    TransportError,
    Update,
)
from .rng import Xoshiro256StarStar, derive_streams

DEFAULT_HANDSHAKE_TIMEOUT = 10.0
EVAL_BATCH_SIZE = 1000


class Mode(enum.Enum):
    CONCURRENT = "concurrent"
    DISTRIBUTED = "distributed"


@dataclass(frozen=True)
class Rounds:
    count: int


@dataclass(frozen=True)
class Duration:
    seconds: float


StopRule = Rounds | Duration


class RoundProtocolError(RuntimeError):
    """An update violated the round protocol (stale round, wrong client, ...)."""


@dataclass(frozen=True)
class ExperimentConfig:
    n_clients: int = 10
    subset_size: int | None = None  # None means all clients
    samples_per_round: int = datagen.DEFAULT_SAMPLES_PER_ROUND
    eta: float = 1.0
    mode: Mode = Mode.CONCURRENT
    gradient_mode: GradientMode = GradientMode.CHAINED
    stop: StopRule = field(default_factory=lambda: Duration(500.0))
    seed: int = 0
    listen_address: str | None = None
    worker_cmd: str | None = None
    local_epochs: int = 1
    initial: WeightInit = field(default_factory=datagen.Fixed)
    eval_samples: int = EVAL_BATCH_SIZE
    handshake_timeout: float = DEFAULT_HANDSHAKE_TIMEOUT

    def __post_init__(self):
        if self.n_clients < 1:
            raise ValueError("need at least one client")
        if not 1 <= self.k <= self.n_clients:
            raise ValueError("subset size must satisfy 1 <= k <= n_clients")
        if self.samples_per_round < 1:
            raise ValueError("samples_per_round must be >= 1")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError("eta must lie in (0, 1]")
        if self.local_epochs < 1:
            raise ValueError("local_epochs must be >= 1")
        if isinstance(self.stop, Rounds) and self.stop.count < 0:
            raise ValueError("round count must be >= 0")
        if isinstance(self.stop, Duration) and self.stop.seconds <= 0:
            raise ValueError("duration must be positive")
        if self.mode is Mode.DISTRIBUTED and not self.listen_address:
            raise ValueError("distributed mode requires a listen address")

    @property
    def k(self) -> int:
        return self.n_clients if self.subset_size is None else self.subset_size


@dataclass(frozen=True)
class RoundMetrics:
    """Measurements after a completed round; `round` counts from 1."""

    round: int
    elapsed_s: float
    epochs: int
    mse: float


@dataclass
class RunResult:
    metrics: list[RoundMetrics]
    final_weights: ModelWeights


def client_step(
    assignment: Assignment,
    client_id: int,
    local_rng: Xoshiro256StarStar,
    config: ExperimentConfig,
) -> Update:
    """One client work item: fresh local data, local training, one Update.

    Shared verbatim by the in-process client threads and the socket worker so
    the two modes are operation-for-operation identical.
    """
    samples = datagen.gen_batch(local_rng, config.samples_per_round)
    weights = assignment.model
    for _ in range(config.local_epochs):
        _, weights = train_batch(samples, weights, config.gradient_mode)
    return Update(
        round=assignment.round,
        client_id=client_id,
        model=weights,
        sample_count=len(samples),
    )


# --------------------------------------------------------------------------
# transports


class ConcurrentTransport:
    """Clients as daemon threads with queue mailboxes."""

    def __init__(self, config: ExperimentConfig, client_seeds: list[int]):
        self._inbox: queue.Queue = queue.Queue()
        self._client_queues: dict[int, queue.Queue] = {}
        self._threads: list[threading.Thread] = []
        for cid in range(config.n_clients):
            q: queue.Queue = queue.Queue()
            self._client_queues[cid] = q
            t = threading.Thread(
                target=self._client_loop,
                args=(cid, Xoshiro256StarStar(client_seeds[cid]), config, q),
                name=f"client-{cid}",
                daemon=True,
            )
            self._threads.append(t)
            t.start()

    def _client_loop(self, cid, rng, config, inbox):
        while True:
            msg = inbox.get()
            if msg is None:
                return
            self._inbox.put(client_step(msg, cid, rng, config))

    def send_assignment(self, client_id: int, a: Assignment) -> None:
        self._client_queues[client_id].put(a)

    def collect_updates(self, round_: int, client_ids: list[int]) -> dict[int, Update]:
        expected = set(client_ids)
        got: dict[int, Update] = {}
        while len(got) < len(expected):
            u = self._inbox.get()
            if u.round != round_:
                raise RoundProtocolError(
                    f"stale update for round {u.round} during round {round_}"
                )
            if u.client_id not in expected or u.client_id in got:
                raise RoundProtocolError(
                    f"unexpected update from client {u.client_id} in round {round_}"
                )
            got[u.client_id] = u
        return got

    def shutdown(self) -> None:
        for q in self._client_queues.values():
            q.put(None)
        for t in self._threads:
            t.join(timeout=5.0)


class SocketTransport:
    """Worker processes attached over TCP with the framed wire protocol."""

    def __init__(self, config: ExperimentConfig, client_seeds: list[int]):
        host, _, port_s = config.listen_address.rpartition(":")
        if not host or not port_s:
            raise ValueError(f"listen address must be host:port, got {config.listen_address!r}")
        self._config = config
        self._procs: list[subprocess.Popen] = []
        self._conns: dict[int, socket.socket] = {}
        self._listener = socket.create_server((host, int(port_s)))
        self._listener.settimeout(config.handshake_timeout)
        actual_port = self._listener.getsockname()[1]
        address = f"{host}:{actual_port}"
        try:
            self._spawn_workers(address, client_seeds)
            self._await_handshakes()
        except Exception:
            self.shutdown()
            raise

    def _spawn_workers(self, address: str, client_seeds: list[int]) -> None:
        cfg = self._config
        for cid in range(cfg.n_clients):
            if cfg.worker_cmd:
                argv = shlex.split(cfg.worker_cmd)
            else:
                argv = [sys.executable, "-m", "fedsim.worker"]
            subst = {
                "{address}": address,
                "{client_id}": str(cid),
                "{seed}": str(client_seeds[cid]),
            }
            if any(key in tok for tok in argv for key in subst):
                argv = [_substitute(tok, subst) for tok in argv]
            else:
                argv += [address, str(cid), str(client_seeds[cid])]
            if cfg.gradient_mode is not GradientMode.CHAINED:
                argv += ["--gradient-mode", cfg.gradient_mode.value]
            if cfg.samples_per_round != datagen.DEFAULT_SAMPLES_PER_ROUND:
                argv += ["--samples", str(cfg.samples_per_round)]
            if cfg.local_epochs != 1:
                argv += ["--local-epochs", str(cfg.local_epochs)]
            self._procs.append(subprocess.Popen(argv))

    def _await_handshakes(self) -> None:
        deadline = time.monotonic() + self._config.handshake_timeout
        while len(self._conns) < self._config.n_clients:
            if time.monotonic() > deadline:
                raise TransportError(
                    f"handshake timeout: {len(self._conns)}/{self._config.n_clients}"
                    " workers connected"
                )
            try:
                conn, _ = self._listener.accept()
            except socket.timeout as exc:
                raise TransportError("handshake timeout while accepting workers") from exc
            conn.settimeout(self._config.handshake_timeout)
            msg = protocol.decode_message(protocol.read_frame(conn))
            if not isinstance(msg, Hello):
                protocol.write_frame(conn, protocol.encode_error(protocol.ERR_PROTOCOL_VIOLATION))
                conn.close()
                raise TransportError(f"expected HELLO, got {type(msg).__name__}")
            if msg.version != protocol.PROTOCOL_VERSION:
                protocol.write_frame(conn, protocol.encode_error(protocol.ERR_VERSION_MISMATCH))
                conn.close()
                raise TransportError(f"worker speaks protocol version {msg.version}")
            if msg.client_id in self._conns or msg.client_id >= self._config.n_clients:
                protocol.write_frame(conn, protocol.encode_error(protocol.ERR_PROTOCOL_VIOLATION))
                conn.close()
                raise TransportError(f"bad client id {msg.client_id} in handshake")
            protocol.write_frame(conn, protocol.encode_ack())
            conn.settimeout(None)  # round reads block until the worker replies
            self._conns[msg.client_id] = conn

    def send_assignment(self, client_id: int, a: Assignment) -> None:
        protocol.write_frame(self._conns[client_id], protocol.encode_assignment(a))

    def collect_updates(self, round_: int, client_ids: list[int]) -> dict[int, Update]:
        got: dict[int, Update] = {}
        for cid in sorted(client_ids):
            msg = protocol.decode_message(protocol.read_frame(self._conns[cid]))
            if isinstance(msg, ProtocolErrorMsg):
                raise TransportError(f"worker {cid} reported error 0x{msg.reason:02X}")
            if not isinstance(msg, Update):
                raise RoundProtocolError(f"expected update from {cid}, got {type(msg).__name__}")
            if msg.round != round_:
                raise RoundProtocolError(
                    f"stale update for round {msg.round} during round {round_}"
                )
            if msg.client_id != cid:
                raise RoundProtocolError(
                    f"update from client {msg.client_id} on connection {cid}"
                )
            got[cid] = msg
        return got

    def shutdown(self) -> None:
        for conn in self._conns.values():
            try:
                protocol.write_frame(conn, protocol.encode_shutdown())
            except TransportError:
                pass
            conn.close()
        self._conns.clear()
        self._listener.close()
        for p in self._procs:
            try:
                p.wait(timeout=2.0)
            except subprocess.TimeoutExpired:
                p.terminate()
                try:
                    p.wait(timeout=2.0)
                except subprocess.TimeoutExpired:
                    p.kill()
                    p.wait()


def _substitute(token: str, subst: dict[str, str]) -> str:
    for k, v in subst.items():
        token = token.replace(k, v)
    return token


# --------------------------------------------------------------------------
# round loop


def server_round(
    model: ModelWeights,
    transport,
    client_ids: list[int],
    k: int,
    subset_rng: Xoshiro256StarStar,
    round_idx: int,
) -> ModelWeights:
    """One server iteration: select, dispatch, block-collect, aggregate."""
    subset = fedsgd.select_subset(client_ids, k, subset_rng)
    assignment = Assignment(round=round_idx, model=model)
    for cid in subset:
        transport.send_assignment(cid, assignment)
    updates = transport.collect_updates(round_idx, subset)
    ordered = [
        fedsgd.ClientUpdate(weights=updates[cid].model, sample_count=updates[cid].sample_count)
        for cid in sorted(updates)
    ]
    return fedsgd.aggregate(ordered)


def _stopped(stop: StopRule, rounds_done: int, elapsed: float) -> bool:
    if isinstance(stop, Rounds):
        return rounds_done >= stop.count
    return elapsed >= stop.seconds


def run(config: ExperimentConfig, on_round=None) -> RunResult:
    """Drive a full experiment; calls ``on_round(metrics)`` as rounds finish."""
    eval_seed, subset_seed, client_seeds = derive_streams(config.seed, config.n_clients)
    eval_batch = datagen.gen_batch(Xoshiro256StarStar(eval_seed), config.eval_samples)
    subset_rng = Xoshiro256StarStar(subset_seed)
    model = datagen.initial_weights(config.initial)
    client_ids = list(range(config.n_clients))

    if config.mode is Mode.CONCURRENT:
        transport = ConcurrentTransport(config, client_seeds)
    else:
        transport = SocketTransport(config, client_seeds)

    metrics: list[RoundMetrics] = []
    start = time.monotonic()
    try:
        round_idx = 0
        while not _stopped(config.stop, round_idx, time.monotonic() - start):
            model = server_round(
                model, transport, client_ids, config.k, subset_rng, round_idx
            )
            round_idx += 1
            m = RoundMetrics(
                round=round_idx,
                elapsed_s=time.monotonic() - start,
                epochs=round_idx * config.local_epochs,
                mse=mse(model, eval_batch),
            )
            metrics.append(m)
            if on_round is not None:
                on_round(m)
    finally:
        transport.shutdown()
    return RunResult(metrics=metrics, final_weights=model)
