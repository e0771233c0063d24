/**
 * Framed binary codec per PROTOCOL.md: 4-byte big-endian length prefix,
 * big-endian integers, little-endian binary64 weights in canonical order.
 */

import { N_WEIGHTS, Weights, weightsFromFlat, weightsToFlat } from "./ann";

export const PROTOCOL_VERSION = 0x01;
export const MAX_PAYLOAD = 4096;

export const MSG_HELLO = 0x00;
export const MSG_ASSIGNMENT = 0x01;
export const MSG_UPDATE = 0x02;
export const MSG_SHUTDOWN = 0x03;
export const MSG_ACK = 0x04;
export const MSG_ERROR = 0x7f;

export const ERR_VERSION_MISMATCH = 0x01;
export const ERR_MALFORMED = 0x02;
export const ERR_PROTOCOL_VIOLATION = 0x03;

export const WEIGHTS_WIRE_SIZE = 8 * N_WEIGHTS; // 136

export class ProtocolError extends Error {
  readonly offset: number;

  constructor(message: string, offset = 0) {
    super(`${message} (offset ${offset})`);
    this.offset = offset;
  }
}

export type Message =
  | { kind: "hello"; version: number; clientId: number }
  | { kind: "assignment"; round: number; model: Weights }
  | { kind: "update"; round: number; clientId: number; sampleCount: number; model: Weights }
  | { kind: "shutdown" }
  | { kind: "ack" }
  | { kind: "error"; reason: number };

export function encodeWeights(model: Weights): Buffer {
  const buf = Buffer.alloc(WEIGHTS_WIRE_SIZE);
  weightsToFlat(model).forEach((v, i) => buf.writeDoubleLE(v, 8 * i));
  return buf;
}

function decodeWeights(payload: Buffer, offset: number): Weights {
  if (payload.length < offset + WEIGHTS_WIRE_SIZE) {
    throw new ProtocolError("truncated weight block", payload.length);
  }
  const flat: number[] = [];
  for (let i = 0; i < N_WEIGHTS; i++) {
    const v = payload.readDoubleLE(offset + 8 * i);
    if (!Number.isFinite(v)) {
      throw new ProtocolError("non-finite weight on the wire", offset + 8 * i);
    }
    flat.push(v);
  }
  return weightsFromFlat(flat);
}

export function encodeHello(version: number, clientId: number): Buffer {
  const buf = Buffer.alloc(6);
  buf.writeUInt8(MSG_HELLO, 0);
  buf.writeUInt8(version, 1);
  buf.writeUInt32BE(clientId, 2);
  return buf;
}

export function encodeUpdate(
  round: number,
  clientId: number,
  sampleCount: number,
  model: Weights,
): Buffer {
  const head = Buffer.alloc(13);
  head.writeUInt8(MSG_UPDATE, 0);
  head.writeUInt32BE(round, 1);
  head.writeUInt32BE(clientId, 5);
  head.writeUInt32BE(sampleCount, 9);
  return Buffer.concat([head, encodeWeights(model)]);
}

export function encodeAssignment(round: number, model: Weights): Buffer {
  const head = Buffer.alloc(5);
  head.writeUInt8(MSG_ASSIGNMENT, 0);
  head.writeUInt32BE(round, 1);
  return Buffer.concat([head, encodeWeights(model)]);
}

export function encodeError(reason: number): Buffer {
  return Buffer.from([MSG_ERROR, reason]);
}

export function encodeShutdown(): Buffer {
  return Buffer.from([MSG_SHUTDOWN]);
}

export function encodeAck(): Buffer {
  return Buffer.from([MSG_ACK]);
}

function requireLength(payload: Buffer, expected: number, what: string): void {
  if (payload.length !== expected) {
    throw new ProtocolError(
      `${what} payload must be ${expected} bytes, got ${payload.length}`,
      Math.min(payload.length, expected),
    );
  }
}

/** Total decoder: a Message or a ProtocolError, never anything else. */
export function decodeMessage(payload: Buffer): Message {
  if (payload.length === 0) throw new ProtocolError("empty payload", 0);
  if (payload.length > MAX_PAYLOAD) {
    throw new ProtocolError("payload exceeds 4096-byte cap", MAX_PAYLOAD);
  }
  const kind = payload.readUInt8(0);
  switch (kind) {
    case MSG_ASSIGNMENT: {
      requireLength(payload, 5 + WEIGHTS_WIRE_SIZE, "assignment");
      return {
        kind: "assignment",
        round: payload.readUInt32BE(1),
        model: decodeWeights(payload, 5),
      };
    }
    case MSG_UPDATE: {
      requireLength(payload, 13 + WEIGHTS_WIRE_SIZE, "update");
      const sampleCount = payload.readUInt32BE(9);
      if (sampleCount < 1) throw new ProtocolError("sample_count must be >= 1", 9);
      return {
        kind: "update",
        round: payload.readUInt32BE(1),
        clientId: payload.readUInt32BE(5),
        sampleCount,
        model: decodeWeights(payload, 13),
      };
    }
    case MSG_HELLO: {
      requireLength(payload, 6, "hello");
      return { kind: "hello", version: payload.readUInt8(1), clientId: payload.readUInt32BE(2) };
    }
    case MSG_SHUTDOWN:
      requireLength(payload, 1, "shutdown");
      return { kind: "shutdown" };
    case MSG_ACK:
      requireLength(payload, 1, "ack");
      return { kind: "ack" };
    case MSG_ERROR:
      requireLength(payload, 2, "error");
      return { kind: "error", reason: payload.readUInt8(1) };
    default:
      throw new ProtocolError(`unknown message type 0x${kind.toString(16)}`, 0);
  }
}

export function frame(payload: Buffer): Buffer {
  if (payload.length > MAX_PAYLOAD) throw new Error("payload exceeds 4096-byte cap");
  const head = Buffer.alloc(4);
  head.writeUInt32BE(payload.length, 0);
  return Buffer.concat([head, payload]);
}

/** Incremental length-prefixed frame reassembly over a byte stream. */
export class FrameReader {
  private buffer: Buffer = Buffer.alloc(0);

  /** Feed a chunk; returns every complete payload now available. */
  push(chunk: Buffer): Buffer[] {
    this.buffer = this.buffer.length === 0 ? chunk : Buffer.concat([this.buffer, chunk]);
    const frames: Buffer[] = [];
    for (;;) {
      if (this.buffer.length < 4) break;
      const length = this.buffer.readUInt32BE(0);
      if (length > MAX_PAYLOAD) {
        throw new ProtocolError(`peer announced oversized frame (${length} bytes)`, 0);
      }
      if (this.buffer.length < 4 + length) break;
      frames.push(this.buffer.subarray(4, 4 + length));
      this.buffer = this.buffer.subarray(4 + length);
    }
    return frames;
  }
}
