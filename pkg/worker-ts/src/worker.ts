/**
 * Training worker process.
 *
 * Usage: node dist/worker.js HOST:PORT CLIENT_ID SEED
 *          [--gradient-mode classic|chained] [--samples N] [--local-epochs E]
 *
 * Connects to the coordinator, handshakes, then answers each assignment
 * with one update: generate a fresh local batch from the seeded stream,
 * run the configured number of sequential training passes, reply with the
 * trained weights. Exits 0 on SHUTDOWN, nonzero on any protocol or
 * transport failure.
 */

import * as net from "net";

import { GradientMode, trainBatch } from "./ann";
import { genBatch } from "./datagen";
import {
  FrameReader,
  Message,
  PROTOCOL_VERSION,
  ProtocolError,
  decodeMessage,
  encodeError,
  encodeHello,
  encodeUpdate,
  frame,
  ERR_MALFORMED,
  ERR_PROTOCOL_VIOLATION,
} from "./protocol";
import { Xoshiro256StarStar } from "./rng";

const HANDSHAKE_TIMEOUT_MS = 10_000;

export interface WorkerOptions {
  host: string;
  port: number;
  clientId: number;
  seed: bigint;
  gradientMode?: GradientMode;
  samplesPerRound?: number;
  localEpochs?: number;
}

export function runWorker(opts: WorkerOptions): Promise<number> {
  const gradientMode = opts.gradientMode ?? "chained";
  const samplesPerRound = opts.samplesPerRound ?? 250;
  const localEpochs = opts.localEpochs ?? 1;
  const rng = new Xoshiro256StarStar(opts.seed);
  const reader = new FrameReader();

  return new Promise((resolve) => {
    const sock = net.connect({ host: opts.host, port: opts.port });
    let acked = false;
    let finished = false;

    const finish = (code: number, destroy = true) => {
      if (finished) return;
      finished = true;
      if (destroy) sock.destroy();
      resolve(code);
    };

    sock.setTimeout(HANDSHAKE_TIMEOUT_MS, () => {
      if (!acked) {
        console.error(`worker ${opts.clientId}: handshake timeout`);
        finish(1);
      }
    });

    sock.on("connect", () => {
      sock.write(frame(encodeHello(PROTOCOL_VERSION, opts.clientId)));
    });

    // flush the error frame before closing, then fail
    const failWithError = (reason: number) => {
      sock.write(frame(encodeError(reason)), () => {
        sock.end();
        finish(1, false);
      });
    };

    const handle = (msg: Message): void => {
      if (!acked) {
        if (msg.kind === "error") {
          console.error(
            `worker ${opts.clientId}: handshake rejected (reason 0x${msg.reason.toString(16)})`,
          );
          finish(1);
        } else if (msg.kind === "ack") {
          acked = true;
          sock.setTimeout(0);
        } else {
          console.error(`worker ${opts.clientId}: expected ACK, got ${msg.kind}`);
          finish(1);
        }
        return;
      }
      switch (msg.kind) {
        case "shutdown":
          sock.end();
          finish(0, false);
          return;
        case "assignment": {
          const samples = genBatch(rng, samplesPerRound);
          let weights = msg.model;
          for (let e = 0; e < localEpochs; e++) {
            weights = trainBatch(samples, weights, gradientMode).weights;
          }
          sock.write(
            frame(encodeUpdate(msg.round, opts.clientId, samples.length, weights)),
          );
          return;
        }
        default:
          console.error(`worker ${opts.clientId}: unexpected ${msg.kind}`);
          failWithError(ERR_PROTOCOL_VIOLATION);
      }
    };

    sock.on("data", (chunk: Buffer) => {
      try {
        for (const payload of reader.push(chunk)) {
          handle(decodeMessage(payload));
          if (finished) return;
        }
      } catch (err) {
        if (err instanceof ProtocolError) {
          console.error(`worker ${opts.clientId}: ${err.message}`);
          failWithError(ERR_MALFORMED);
        } else {
          console.error(`worker ${opts.clientId}: ${String(err)}`);
          finish(1);
        }
      }
    });

    sock.on("error", (err) => {
      console.error(`worker ${opts.clientId}: socket error: ${err.message}`);
      finish(1);
    });

    sock.on("close", () => {
      if (!finished) {
        console.error(`worker ${opts.clientId}: connection closed unexpectedly`);
        finish(1, false);
      }
    });
  });
}

export function parseArgs(argv: string[]): WorkerOptions {
  const positional: string[] = [];
  const options: Partial<WorkerOptions> = {};
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg === "--gradient-mode") {
      const v = argv[++i];
      if (v !== "classic" && v !== "chained") throw new Error(`bad gradient mode ${v}`);
      options.gradientMode = v;
    } else if (arg === "--samples") {
      options.samplesPerRound = parseInt(argv[++i], 10);
    } else if (arg === "--local-epochs") {
      options.localEpochs = parseInt(argv[++i], 10);
    } else {
      positional.push(arg);
    }
  }
  if (positional.length !== 3) {
    throw new Error("usage: worker HOST:PORT CLIENT_ID SEED [options]");
  }
  const sep = positional[0].lastIndexOf(":");
  if (sep < 1) throw new Error(`bad address ${positional[0]}, want host:port`);
  return {
    host: positional[0].slice(0, sep),
    port: parseInt(positional[0].slice(sep + 1), 10),
    clientId: parseInt(positional[1], 10),
    seed: BigInt(positional[2]),
    ...options,
  };
}

if (require.main === module) {
  let opts: WorkerOptions;
  try {
    opts = parseArgs(process.argv.slice(2));
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    process.exit(2);
  }
  runWorker(opts).then((code) => process.exit(code));
}
