/**
 * Minimal protobuf wire-format decoder and encoder.
 *
 * Messages decode into a map from field number to the raw values seen on the
 * wire; nested messages stay as bytes until a schema asks for them. This is
 * enough to read the documented subset of the segment record schema without
 * pulling in a protobuf runtime. Unknown fields are preserved on decode and
 * simply ignored, which is exactly the proto3 contract.
 */

export enum WireType {
  Varint = 0,
  Fixed64 = 1,
  LengthDelimited = 2,
  Fixed32 = 5,
}

export type WireValue =
  | { wireType: WireType.Varint; value: bigint }
  | { wireType: WireType.Fixed64; value: bigint }
  | { wireType: WireType.LengthDelimited; value: Uint8Array }
  | { wireType: WireType.Fixed32; value: number };

export type MessageFields = Map<number, WireValue[]>;

export class ProtoDecodeError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ProtoDecodeError";
  }
}

export function decodeMessage(buffer: Uint8Array): MessageFields {
  const fields: MessageFields = new Map();
  const view = new DataView(buffer.buffer, buffer.byteOffset, buffer.byteLength);
  let offset = 0;

  const readVarint = (): bigint => {
    let result = 0n;
    let shift = 0n;
    for (;;) {
      if (offset >= buffer.length) {
        throw new ProtoDecodeError("varint runs past end of buffer");
      }
      const byte = buffer[offset++];
      result |= BigInt(byte & 0x7f) << shift;
      if ((byte & 0x80) === 0) return result;
      shift += 7n;
      if (shift > 63n) throw new ProtoDecodeError("varint longer than 64 bits");
    }
  };

  while (offset < buffer.length) {
    const tag = readVarint();
    const fieldNumber = Number(tag >> 3n);
    const wireType = Number(tag & 7n) as WireType;
    if (fieldNumber === 0) throw new ProtoDecodeError("field number 0 is invalid");
    let value: WireValue;
    switch (wireType) {
      case WireType.Varint:
        value = { wireType, value: readVarint() };
        break;
      case WireType.Fixed64: {
        if (offset + 8 > buffer.length) {
          throw new ProtoDecodeError("fixed64 runs past end of buffer");
        }
        value = { wireType, value: view.getBigUint64(offset, true) };
        offset += 8;
        break;
      }
      case WireType.LengthDelimited: {
        const length = Number(readVarint());
        if (offset + length > buffer.length) {
          throw new ProtoDecodeError("length-delimited field runs past end");
        }
        value = { wireType, value: buffer.subarray(offset, offset + length) };
        offset += length;
        break;
      }
      case WireType.Fixed32: {
        if (offset + 4 > buffer.length) {
          throw new ProtoDecodeError("fixed32 runs past end of buffer");
        }
        value = { wireType, value: view.getUint32(offset, true) };
        offset += 4;
        break;
      }
      default:
        throw new ProtoDecodeError(`unsupported wire type ${wireType}`);
    }
    const list = fields.get(fieldNumber);
    if (list) list.push(value);
    else fields.set(fieldNumber, [value]);
  }
  return fields;
}

// -- typed readers ----------------------------------------------------------

export function getVarint(fields: MessageFields, field: number): bigint | undefined {
  const entries = fields.get(field);
  if (!entries || entries.length === 0) return undefined;
  const last = entries[entries.length - 1];
  if (last.wireType !== WireType.Varint) {
    throw new ProtoDecodeError(`field ${field}: expected varint`);
  }
  return last.value;
}

export function getDouble(fields: MessageFields, field: number): number | undefined {
  const entries = fields.get(field);
  if (!entries || entries.length === 0) return undefined;
  const last = entries[entries.length - 1];
  if (last.wireType !== WireType.Fixed64) {
    throw new ProtoDecodeError(`field ${field}: expected double`);
  }
  const buf = new ArrayBuffer(8);
  new DataView(buf).setBigUint64(0, last.value, true);
  return new DataView(buf).getFloat64(0, true);
}

export function getFloat(fields: MessageFields, field: number): number | undefined {
  const entries = fields.get(field);
  if (!entries || entries.length === 0) return undefined;
  const last = entries[entries.length - 1];
  if (last.wireType !== WireType.Fixed32) {
    throw new ProtoDecodeError(`field ${field}: expected float`);
  }
  const buf = new ArrayBuffer(4);
  new DataView(buf).setUint32(0, last.value, true);
  return new DataView(buf).getFloat32(0, true);
}

export function getBytes(fields: MessageFields, field: number): Uint8Array | undefined {
  const entries = fields.get(field);
  if (!entries || entries.length === 0) return undefined;
  const last = entries[entries.length - 1];
  if (last.wireType !== WireType.LengthDelimited) {
    throw new ProtoDecodeError(`field ${field}: expected length-delimited`);
  }
  return last.value;
}

export function getString(fields: MessageFields, field: number): string | undefined {
  const bytes = getBytes(fields, field);
  return bytes === undefined ? undefined : new TextDecoder().decode(bytes);
}

export function getMessages(fields: MessageFields, field: number): MessageFields[] {
  const entries = fields.get(field) ?? [];
  return entries.map((e) => {
    if (e.wireType !== WireType.LengthDelimited) {
      throw new ProtoDecodeError(`field ${field}: expected nested message`);
    }
    return decodeMessage(e.value);
  });
}

/** Packed or unpacked repeated double. */
export function getRepeatedDouble(fields: MessageFields, field: number): number[] {
  const entries = fields.get(field) ?? [];
  const out: number[] = [];
  for (const e of entries) {
    if (e.wireType === WireType.Fixed64) {
      const buf = new ArrayBuffer(8);
      new DataView(buf).setBigUint64(0, e.value, true);
      out.push(new DataView(buf).getFloat64(0, true));
    } else if (e.wireType === WireType.LengthDelimited) {
      const bytes = e.value;
      if (bytes.length % 8 !== 0) {
        throw new ProtoDecodeError(`field ${field}: packed doubles misaligned`);
      }
      const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
      for (let i = 0; i < bytes.length; i += 8) {
        out.push(view.getFloat64(i, true));
      }
    } else {
      throw new ProtoDecodeError(`field ${field}: expected doubles`);
    }
  }
  return out;
}

// -- encoder (used to build fixtures and by tests) ---------------------------

export class ProtoWriter {
  private parts: Uint8Array[] = [];

  private pushVarint(value: bigint): void {
    const bytes: number[] = [];
    let v = value & 0xffffffffffffffffn;
    do {
      let byte = Number(v & 0x7fn);
      v >>= 7n;
      if (v !== 0n) byte |= 0x80;
      bytes.push(byte);
    } while (v !== 0n);
    this.parts.push(Uint8Array.from(bytes));
  }

  private tag(field: number, wireType: WireType): void {
    this.pushVarint((BigInt(field) << 3n) | BigInt(wireType));
  }

  varint(field: number, value: bigint | number): this {
    this.tag(field, WireType.Varint);
    this.pushVarint(BigInt(value));
    return this;
  }

  double(field: number, value: number): this {
    this.tag(field, WireType.Fixed64);
    const buf = new Uint8Array(8);
    new DataView(buf.buffer).setFloat64(0, value, true);
    this.parts.push(buf);
    return this;
  }

  float(field: number, value: number): this {
    this.tag(field, WireType.Fixed32);
    const buf = new Uint8Array(4);
    new DataView(buf.buffer).setFloat32(0, value, true);
    this.parts.push(buf);
    return this;
  }

  bytes(field: number, value: Uint8Array): this {
    this.tag(field, WireType.LengthDelimited);
    this.pushVarint(BigInt(value.length));
    this.parts.push(value);
    return this;
  }

  string(field: number, value: string): this {
    return this.bytes(field, new TextEncoder().encode(value));
  }

  message(field: number, value: ProtoWriter): this {
    return this.bytes(field, value.finish());
  }

  packedDoubles(field: number, values: number[]): this {
    const buf = new Uint8Array(values.length * 8);
    const view = new DataView(buf.buffer);
    values.forEach((v, i) => view.setFloat64(i * 8, v, true));
    return this.bytes(field, buf);
  }

  finish(): Uint8Array {
    let total = 0;
    for (const p of this.parts) total += p.length;
    const out = new Uint8Array(total);
    let offset = 0;
    for (const p of this.parts) {
      out.set(p, offset);
      offset += p.length;
    }
    return out;
  }
}
