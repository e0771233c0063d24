import { describe, expect, test } from "vitest";

import { weightsFromFlat } from "../src/ann";
import {
  FrameReader,
  PROTOCOL_VERSION,
  ProtocolError,
  decodeMessage,
  encodeAck,
  encodeAssignment,
  encodeError,
  encodeHello,
  encodeShutdown,
  encodeUpdate,
  encodeWeights,
  frame,
} from "../src/protocol";
import { Xoshiro256StarStar } from "../src/rng";
import { readFixture } from "./util";

function randomWeights(rng: Xoshiro256StarStar) {
  const flat: number[] = [];
  for (let i = 0; i < 17; i++) flat.push(rng.uniform() * 2 - 1);
  return weightsFromFlat(flat);
}

describe("frame sizes", () => {
  const w = weightsFromFlat(new Array(17).fill(0.25));

  test("derived sizes hold", () => {
    expect(frame(encodeAssignment(3, w)).length).toBe(145);
    expect(frame(encodeUpdate(3, 1, 250, w)).length).toBe(153);
    expect(frame(encodeHello(PROTOCOL_VERSION, 12)).length).toBe(10);
    expect(frame(encodeShutdown()).length).toBe(5);
    expect(frame(encodeAck()).length).toBe(5);
    expect(frame(encodeError(0x01)).length).toBe(6);
  });

  test("sample count 250 encodes big-endian", () => {
    const payload = encodeUpdate(0, 0, 250, w);
    expect(payload.subarray(9, 13).toString("hex")).toBe("000000fa");
  });
});

describe("round trips", () => {
  test("assignment and update round-trip bit-exactly", () => {
    const rng = new Xoshiro256StarStar(31n);
    for (let i = 0; i < 500; i++) {
      const w = randomWeights(rng);
      const a = decodeMessage(encodeAssignment(i, w));
      if (a.kind !== "assignment") throw new Error("bad kind");
      expect(encodeAssignment(a.round, a.model)).toEqual(encodeAssignment(i, w));

      const u = decodeMessage(encodeUpdate(i, 7, 250, w));
      if (u.kind !== "update") throw new Error("bad kind");
      expect(encodeUpdate(u.round, u.clientId, u.sampleCount, u.model)).toEqual(
        encodeUpdate(i, 7, 250, w),
      );
    }
  });

  test("control messages", () => {
    expect(decodeMessage(encodeAck())).toEqual({ kind: "ack" });
    expect(decodeMessage(encodeShutdown())).toEqual({ kind: "shutdown" });
    expect(decodeMessage(encodeError(2))).toEqual({ kind: "error", reason: 2 });
    expect(decodeMessage(encodeHello(1, 3))).toEqual({
      kind: "hello",
      version: 1,
      clientId: 3,
    });
  });
});

describe("golden fixtures", () => {
  test("hello frame matches", () => {
    expect(frame(encodeHello(PROTOCOL_VERSION, 3))).toEqual(readFixture("hello_c3.bin"));
  });

  test("assignment fixture decodes to round 7 with the canonical weights", () => {
    const data = readFixture("assignment_r7.bin");
    const msg = decodeMessage(data.subarray(4));
    if (msg.kind !== "assignment") throw new Error("bad kind");
    expect(msg.round).toBe(7);
    expect(encodeWeights(msg.model)).toEqual(readFixture("weights_canonical.bin"));
  });

  test("control fixtures match", () => {
    expect(frame(encodeShutdown())).toEqual(readFixture("shutdown.bin"));
    expect(frame(encodeAck())).toEqual(readFixture("ack.bin"));
    expect(frame(encodeError(0x01))).toEqual(readFixture("error_version.bin"));
  });
});

describe("decoder totality", () => {
  test("unknown type byte raises a protocol error", () => {
    expect(() => decodeMessage(Buffer.from([0x09, 0, 0]))).toThrow(ProtocolError);
  });

  test("empty payload raises", () => {
    expect(() => decodeMessage(Buffer.alloc(0))).toThrow(ProtocolError);
  });

  test("truncated assignment raises with the offset", () => {
    const img = encodeAssignment(1, weightsFromFlat(new Array(17).fill(0)));
    try {
      decodeMessage(img.subarray(0, 60));
      throw new Error("should have thrown");
    } catch (err) {
      expect(err).toBeInstanceOf(ProtocolError);
      expect((err as ProtocolError).offset).toBe(60);
    }
  });

  test("random bytes either decode or raise ProtocolError", () => {
    const rng = new Xoshiro256StarStar(404n);
    for (let i = 0; i < 2000; i++) {
      const len = Number(rng.nextU64() % 200n);
      const blob = Buffer.alloc(len);
      for (let j = 0; j < len; j++) blob[j] = Number(rng.nextU64() & 0xffn);
      try {
        decodeMessage(blob);
      } catch (err) {
        expect(err).toBeInstanceOf(ProtocolError);
      }
    }
  });
});

describe("frame reader", () => {
  test("reassembles frames across arbitrary chunk boundaries", () => {
    const w = weightsFromFlat(new Array(17).fill(1.5));
    const stream = Buffer.concat([
      frame(encodeAssignment(1, w)),
      frame(encodeShutdown()),
      frame(encodeAck()),
    ]);
    for (const chunkSize of [1, 3, 7, 145, 1000]) {
      const reader = new FrameReader();
      const collected: Buffer[] = [];
      for (let off = 0; off < stream.length; off += chunkSize) {
        collected.push(...reader.push(stream.subarray(off, off + chunkSize)));
      }
      expect(collected.length).toBe(3);
      expect(decodeMessage(collected[0]).kind).toBe("assignment");
      expect(decodeMessage(collected[1]).kind).toBe("shutdown");
      expect(decodeMessage(collected[2]).kind).toBe("ack");
    }
  });

  test("oversized announced frame raises", () => {
    const reader = new FrameReader();
    const bad = Buffer.alloc(4);
    bad.writeUInt32BE(5000, 0);
    expect(() => reader.push(bad)).toThrow(ProtocolError);
  });
});
