/**
 * TFRecord container framing: every record is
 *
 *   uint64le length | uint32le maskedCrc(length bytes) |
 *   payload         | uint32le maskedCrc(payload)
 *
 * Both checksums are verified on read; a mismatch raises CorruptRecordError
 * with the byte offset so callers can skip or abort.
 */

import { maskedCrc32c } from "./crc32c";

export class CorruptRecordError extends Error {
  constructor(message: string, public readonly offset: number) {
    super(`${message} (byte offset ${offset})`);
    this.name = "CorruptRecordError";
  }
}

export function* readRecords(buffer: Uint8Array): Generator<Uint8Array> {
  const view = new DataView(buffer.buffer, buffer.byteOffset, buffer.byteLength);
  let offset = 0;
  while (offset < buffer.length) {
    if (offset + 12 > buffer.length) {
      throw new CorruptRecordError("truncated record header", offset);
    }
    const length = view.getBigUint64(offset, true);
    if (length > BigInt(Number.MAX_SAFE_INTEGER)) {
      throw new CorruptRecordError("record length overflows", offset);
    }
    const n = Number(length);
    const lengthBytes = buffer.subarray(offset, offset + 8);
    const lengthCrc = view.getUint32(offset + 8, true);
    if (maskedCrc32c(lengthBytes) !== lengthCrc) {
      throw new CorruptRecordError("length checksum mismatch", offset);
    }
    const dataStart = offset + 12;
    if (dataStart + n + 4 > buffer.length) {
      throw new CorruptRecordError("truncated record payload", offset);
    }
    const payload = buffer.subarray(dataStart, dataStart + n);
    const payloadCrc = view.getUint32(dataStart + n, true);
    if (maskedCrc32c(payload) !== payloadCrc) {
      throw new CorruptRecordError("payload checksum mismatch", offset);
    }
    yield payload;
    offset = dataStart + n + 4;
  }
}

export function writeRecords(payloads: Uint8Array[]): Uint8Array {
  let total = 0;
  for (const p of payloads) total += 12 + p.length + 4;
  const out = new Uint8Array(total);
  const view = new DataView(out.buffer);
  let offset = 0;
  for (const payload of payloads) {
    view.setBigUint64(offset, BigInt(payload.length), true);
    const lengthBytes = out.subarray(offset, offset + 8);
    view.setUint32(offset + 8, maskedCrc32c(lengthBytes), true);
    out.set(payload, offset + 12);
    view.setUint32(offset + 12 + payload.length, maskedCrc32c(payload), true);
    offset += 12 + payload.length + 4;
  }
  return out;
}
