#!/usr/bin/env python3
"""Regenerate the golden fixtures under fixtures/.

These byte vectors pin the wire format and the numeric pipeline for every
implementation (this package and the TypeScript worker).  They are committed;
rerun this script only when the protocol document changes, and review the
diff like a protocol change.
"""

from __future__ import annotations

import json
import struct
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from fedsim import datagen, protocol
from fedsim.ann import GradientMode, train_batch
from fedsim.fmath import exp
from fedsim.protocol import Assignment, Hello, Update
from fedsim.rng import Xoshiro256StarStar

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

GOLDEN_ROUND = 7
GOLDEN_CLIENT_ID = 3
GOLDEN_WORKER_SEED = 1337
GOLDEN_SAMPLES = 250


def f64_hex(x: float) -> str:
    return struct.pack("<d", x).hex()


def main() -> None:
    FIXTURES.mkdir(exist_ok=True)
    model = datagen.fixed_weights()

    (FIXTURES / "weights_canonical.bin").write_bytes(protocol.encode_weights(model))

    assignment = Assignment(round=GOLDEN_ROUND, model=model)
    assignment_frame = protocol.frame(protocol.encode_assignment(assignment))
    (FIXTURES / "assignment_r7.bin").write_bytes(assignment_frame)

    # the update a fresh worker (seed below) must produce for that assignment
    rng = Xoshiro256StarStar(GOLDEN_WORKER_SEED)
    samples = datagen.gen_batch(rng, GOLDEN_SAMPLES)
    _, trained = train_batch(samples, model, GradientMode.CHAINED)
    update = Update(
        round=GOLDEN_ROUND,
        client_id=GOLDEN_CLIENT_ID,
        model=trained,
        sample_count=GOLDEN_SAMPLES,
    )
    update_frame = protocol.frame(protocol.encode_update(update))
    (FIXTURES / "update_r7_c3.bin").write_bytes(update_frame)

    (FIXTURES / "hello_c3.bin").write_bytes(
        protocol.frame(protocol.encode_hello(Hello(protocol.PROTOCOL_VERSION, GOLDEN_CLIENT_ID)))
    )
    (FIXTURES / "ack.bin").write_bytes(protocol.frame(protocol.encode_ack()))
    (FIXTURES / "shutdown.bin").write_bytes(protocol.frame(protocol.encode_shutdown()))
    (FIXTURES / "error_version.bin").write_bytes(
        protocol.frame(protocol.encode_error(protocol.ERR_VERSION_MISMATCH))
    )

    manifest = {
        "golden_round": GOLDEN_ROUND,
        "golden_client_id": GOLDEN_CLIENT_ID,
        "golden_worker_seed": GOLDEN_WORKER_SEED,
        "golden_samples_per_round": GOLDEN_SAMPLES,
        "gradient_mode": "chained",
        "note": "update_r7_c3.bin is the exact reply a conforming worker sends "
                "for assignment_r7.bin given the seed above",
    }
    (FIXTURES / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")

    # RNG stream vectors: raw 64-bit outputs and uniform doubles for seed 42
    rng = Xoshiro256StarStar(42)
    raw = [f"{rng.next_u64():016x}" for _ in range(32)]
    rng = Xoshiro256StarStar(42)
    uniforms = [f64_hex(rng.uniform()) for _ in range(16)]
    (FIXTURES / "rng_stream.json").write_text(
        json.dumps({"seed": 42, "u64_hex": raw, "uniform_f64le_hex": uniforms}, indent=2)
        + "\n"
    )

    # exponential vectors across all algorithm branches
    xs = [
        0.0, -0.0, 1.0, -1.0, 0.5, -0.5, 2.0, -2.0, 10.0, -10.0,
        0.25, -0.25, 0.3465, -0.3465, 0.3466, -0.3466, 1.0397, -1.0397,
        37.5, -37.5, 100.0, -100.0, 600.0, -600.0, 709.5, -709.5,
        -745.0, 700.25, -700.25, 2.0**-29, -(2.0**-29), 2.0**-27, -(2.0**-27),
        1.0986122886681098, -1.0986122886681098, 0.0755, -0.0755,
        3.141592653589793, -3.141592653589793, 23.7, -23.7,
    ]
    rng = Xoshiro256StarStar(2024)
    xs += [(rng.uniform() - 0.5) * 80.0 for _ in range(88)]
    vectors = [{"x": f64_hex(x), "exp": f64_hex(exp(x))} for x in xs]
    (FIXTURES / "exp_vectors.json").write_text(json.dumps(vectors, indent=2) + "\n")

    # training vectors: tiny batches through both gradient modes
    w = datagen.fixed_weights()
    batch_rng = Xoshiro256StarStar(555)
    batch = datagen.gen_batch(batch_rng, 4)
    cases = []
    for mode in (GradientMode.CHAINED, GradientMode.CLASSIC):
        errors, trained_w = train_batch(batch, w, mode)
        cases.append(
            {
                "mode": mode.value,
                "initial_weights": [f64_hex(v) for v in w.flat()],
                "samples": [
                    {
                        "input": [f64_hex(v) for v in s.input],
                        "target": [f64_hex(v) for v in s.target],
                    }
                    for s in batch
                ],
                "per_sample_deltas": [[f64_hex(v) for v in e] for e in errors],
                "final_weights": [f64_hex(v) for v in trained_w.flat()],
            }
        )
    (FIXTURES / "train_vectors.json").write_text(json.dumps(cases, indent=2) + "\n")

    print(f"wrote fixtures to {FIXTURES}")


if __name__ == "__main__":
    main()
