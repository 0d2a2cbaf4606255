import { describe, expect, it } from "vitest";

import {
  ProtoDecodeError,
  ProtoWriter,
  decodeMessage,
  getDouble,
  getMessages,
  getRepeatedDouble,
  getString,
  getVarint,
} from "../src/proto";

describe("proto wire format", () => {
  it("encodes and decodes scalar fields", () => {
    const msg = new ProtoWriter()
      .varint(1, 150)
      .double(2, -3.25)
      .string(3, "hello")
      .float(4, 1.5)
      .finish();
    const fields = decodeMessage(msg);
    expect(getVarint(fields, 1)).toBe(150n);
    expect(getDouble(fields, 2)).toBe(-3.25);
    expect(getString(fields, 3)).toBe("hello");
  });

  it("matches the canonical varint example", () => {
    // field 1, varint 150 encodes as 08 96 01
    const bytes = new ProtoWriter().varint(1, 150).finish();
    expect([...bytes]).toEqual([0x08, 0x96, 0x01]);
  });

  it("handles nested messages and repetition", () => {
    const inner = new ProtoWriter().string(1, "abc");
    const msg = new ProtoWriter()
      .message(5, inner)
      .message(5, new ProtoWriter().string(1, "def"))
      .finish();
    const nested = getMessages(decodeMessage(msg), 5);
    expect(nested.map((m) => getString(m, 1))).toEqual(["abc", "def"]);
  });

  it("reads packed and unpacked doubles", () => {
    const packed = new ProtoWriter().packedDoubles(1, [1.5, -2.5, 3.0]).finish();
    expect(getRepeatedDouble(decodeMessage(packed), 1)).toEqual([1.5, -2.5, 3.0]);
    const unpacked = new ProtoWriter().double(1, 1.5).double(1, -2.5).finish();
    expect(getRepeatedDouble(decodeMessage(unpacked), 1)).toEqual([1.5, -2.5]);
  });

  it("ignores unknown fields", () => {
    const msg = new ProtoWriter()
      .varint(99, 7)
      .string(1, "keep")
      .finish();
    expect(getString(decodeMessage(msg), 1)).toBe("keep");
  });

  it("rejects truncated buffers", () => {
    const msg = new ProtoWriter().string(1, "hello").finish();
    expect(() => decodeMessage(msg.subarray(0, msg.length - 2)))
      .toThrow(ProtoDecodeError);
  });

  it("round-trips 64-bit varints", () => {
    const big = 0xfedcba9876543210n;
    const fields = decodeMessage(new ProtoWriter().varint(1, big).finish());
    expect(getVarint(fields, 1)).toBe(big);
  });
});
