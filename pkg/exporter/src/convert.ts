/**
 * Record-to-JSONL conversion.
 *
 * Each frame becomes one JSON line in the drivebc segment schema, with the
 * exact field order the primary toolkit's serializer uses. The record pose
 * stores the vehicle-to-global transform in column-vector convention
 * (translation in the last column); the JSONL schema is row-vector
 * (translation in the last row), so the matrix is transposed on the way
 * out.
 *
 * Error policy: framing or proto decode failures skip the rest of that
 * record file with a logged warning and a nonzero skip count (partial
 * exports of a large corpus are useful); a frame that decodes cleanly but
 * lacks the required fields means the schema itself does not match, which
 * is a hard error.
 */

import { getExtractor } from "./embeddings";
import {
  MessageFields,
  ProtoDecodeError,
  decodeMessage,
  getBytes,
  getDouble,
  getMessages,
  getRepeatedDouble,
  getString,
  getVarint,
} from "./proto";
import * as schema from "./schema";
import { CorruptRecordError, readRecords } from "./tfrecord";

export const VIEW_ORDER = ["front", "front_left", "front_right", "side_left",
  "side_right"] as const;

export class SchemaMismatchError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SchemaMismatchError";
  }
}

export interface DecodedLabel {
  objId: string;
  objType: string;
  centerV: [number, number, number];
  dims: [number, number, number];
  heading: number;
  velocityV: [number, number, number];
  accelV: [number, number, number] | null;
}

export interface DecodedFrame {
  segmentId: string;
  timestampMicros: bigint;
  /** row-major 4x4, column-vector convention as stored in the record */
  pose: number[];
  egoVelocity: [number, number, number];
  labels: DecodedLabel[];
  images: Map<string, Uint8Array>;
}

function requireField<T>(value: T | undefined, what: string): T {
  if (value === undefined) {
    throw new SchemaMismatchError(`record schema mismatch: missing ${what}`);
  }
  return value;
}

export function decodeFrame(payload: Uint8Array): DecodedFrame {
  const frame = decodeMessage(payload);
  const context = getMessages(frame, schema.FRAME.CONTEXT);
  if (context.length === 0) {
    throw new SchemaMismatchError("record schema mismatch: missing context");
  }
  const segmentId = requireField(
    getString(context[0], schema.CONTEXT.NAME), "context.name");
  const timestamp = requireField(
    getVarint(frame, schema.FRAME.TIMESTAMP_MICROS), "timestamp_micros");
  const poseMsgs = getMessages(frame, schema.FRAME.POSE);
  if (poseMsgs.length === 0) {
    throw new SchemaMismatchError("record schema mismatch: missing pose");
  }
  const transform = getRepeatedDouble(poseMsgs[0], schema.POSE.TRANSFORM);
  if (transform.length !== 16) {
    throw new SchemaMismatchError(
      `record schema mismatch: pose has ${transform.length} values, expected 16`);
  }

  const images = new Map<string, Uint8Array>();
  let egoVelocity: [number, number, number] | undefined;
  for (const image of getMessages(frame, schema.FRAME.IMAGES)) {
    const nameEnum = Number(getVarint(image, schema.CAMERA_IMAGE.NAME) ?? 0n);
    const view = schema.CAMERA_NAMES[nameEnum];
    if (view === undefined) continue;
    const bytes = getBytes(image, schema.CAMERA_IMAGE.IMAGE);
    if (bytes !== undefined) images.set(view, bytes);
    if (view === "front") {
      const vel = getMessages(image, schema.CAMERA_IMAGE.VELOCITY);
      if (vel.length > 0) {
        egoVelocity = [
          readFloatOrDouble(vel[0], schema.VELOCITY.V_X),
          readFloatOrDouble(vel[0], schema.VELOCITY.V_Y),
          readFloatOrDouble(vel[0], schema.VELOCITY.V_Z),
        ];
      }
    }
  }

  const labels: DecodedLabel[] = [];
  for (const label of getMessages(frame, schema.FRAME.LASER_LABELS)) {
    const boxes = getMessages(label, schema.LABEL.BOX);
    if (boxes.length === 0) continue;
    const box = boxes[0];
    const metadata = getMessages(label, schema.LABEL.METADATA);
    const meta = metadata.length > 0 ? metadata[0] : undefined;
    const typeEnum = Number(getVarint(label, schema.LABEL.TYPE) ?? 0n);
    const speed: [number, number, number] = meta
      ? [getDouble(meta, schema.METADATA.SPEED_X) ?? 0,
         getDouble(meta, schema.METADATA.SPEED_Y) ?? 0,
         getDouble(meta, schema.METADATA.SPEED_Z) ?? 0]
      : [0, 0, 0];
    const hasAccel = meta !== undefined
      && (meta.has(schema.METADATA.ACCEL_X) || meta.has(schema.METADATA.ACCEL_Y)
          || meta.has(schema.METADATA.ACCEL_Z));
    labels.push({
      objId: getString(label, schema.LABEL.ID) ?? "",
      objType: schema.LABEL_TYPES[typeEnum] ?? "unknown",
      centerV: [requireField(getDouble(box, schema.BOX.CENTER_X), "box.center_x"),
                getDouble(box, schema.BOX.CENTER_Y) ?? 0,
                getDouble(box, schema.BOX.CENTER_Z) ?? 0],
      dims: [getDouble(box, schema.BOX.LENGTH) ?? 0,
             getDouble(box, schema.BOX.WIDTH) ?? 0,
             getDouble(box, schema.BOX.HEIGHT) ?? 0],
      heading: wrapHeading(getDouble(box, schema.BOX.HEADING) ?? 0),
      velocityV: speed,
      accelV: hasAccel && meta
        ? [getDouble(meta, schema.METADATA.ACCEL_X) ?? 0,
           getDouble(meta, schema.METADATA.ACCEL_Y) ?? 0,
           getDouble(meta, schema.METADATA.ACCEL_Z) ?? 0]
        : null,
    });
  }

  return {
    segmentId,
    timestampMicros: timestamp,
    pose: transform,
    egoVelocity: egoVelocity ?? [0, 0, 0],
    labels,
    images,
  };
}

function readFloatOrDouble(fields: MessageFields, field: number): number {
  // velocity components are float on the wire; tolerate double encodings too
  const entries = fields.get(field);
  if (!entries || entries.length === 0) return 0;
  const last = entries[entries.length - 1];
  if (last.wireType === 1) {
    const buf = new ArrayBuffer(8);
    new DataView(buf).setBigUint64(0, last.value as bigint, true);
    return new DataView(buf).getFloat64(0, true);
  }
  const buf = new ArrayBuffer(4);
  new DataView(buf).setUint32(0, last.value as number, true);
  return new DataView(buf).getFloat32(0, true);
}

function wrapHeading(heading: number): number {
  let h = heading;
  while (h <= -Math.PI) h += 2 * Math.PI;
  while (h > Math.PI) h -= 2 * Math.PI;
  return h;
}

/** Transpose a row-major 4x4 from column-vector to row-vector convention. */
export function transposePose(transform: number[]): number[] {
  const out = new Array<number>(16);
  for (let r = 0; r < 4; r++) {
    for (let c = 0; c < 4; c++) {
      out[c * 4 + r] = transform[r * 4 + c];
    }
  }
  return out;
}

export interface ConvertOptions {
  views: string[];
  extractorId?: string;
}

/** One frame to one JSONL line in the primary toolkit's canonical order. */
export function frameToJsonLine(frame: DecodedFrame, tIndex: number,
                                options: ConvertOptions): string {
  const labels = frame.labels.map((label) => {
    const out: Record<string, unknown> = {
      obj_id: label.objId,
      obj_type: label.objType,
      center_v: label.centerV,
      dims: label.dims,
      heading: label.heading,
      velocity_v: label.velocityV,
    };
    if (label.accelV !== null) out.accel_v = label.accelV;
    return out;
  });
  const obj: Record<string, unknown> = {
    segment_id: frame.segmentId,
    t_index: tIndex,
    timestamp_s: Number(frame.timestampMicros) / 1e6,
    pose: transposePose(frame.pose),
    ego_velocity_g: frame.egoVelocity,
    labels,
  };
  if (options.views.length > 0) {
    const extractor = getExtractor(options.extractorId ?? "");
    const embeddings: Record<string, number[]> = {};
    for (const view of VIEW_ORDER) {
      if (!options.views.includes(view)) continue;
      const image = frame.images.get(view);
      if (image === undefined) {
        throw new SchemaMismatchError(
          `frame has no '${view}' image but that view was requested`);
      }
      embeddings[view] = extractor.extract(image, view);
    }
    obj.embeddings = embeddings;
  }
  return JSON.stringify(obj);
}

export interface SegmentResult {
  segmentId: string;
  frames: number;
  jsonl: string;
}

export interface ConvertStats {
  segments: SegmentResult[];
  skippedRecords: number;
  warnings: string[];
}

/** Convert one record file's bytes into JSONL segments. */
export function convertRecordFile(buffer: Uint8Array,
                                  options: ConvertOptions): ConvertStats {
  const framesBySegment = new Map<string, DecodedFrame[]>();
  const warnings: string[] = [];
  let skipped = 0;
  try {
    for (const payload of readRecords(buffer)) {
      try {
        const frame = decodeFrame(payload);
        const list = framesBySegment.get(frame.segmentId);
        if (list) list.push(frame);
        else framesBySegment.set(frame.segmentId, [frame]);
      } catch (err) {
        if (err instanceof ProtoDecodeError) {
          skipped += 1;
          warnings.push(`skipped undecodable record: ${err.message}`);
        } else {
          throw err;
        }
      }
    }
  } catch (err) {
    if (err instanceof CorruptRecordError) {
      skipped += 1;
      warnings.push(`skipped rest of file after corrupt record: ${err.message}`);
    } else {
      throw err;
    }
  }

  const segments: SegmentResult[] = [];
  for (const [segmentId, frames] of framesBySegment) {
    frames.sort((a, b) => (a.timestampMicros < b.timestampMicros ? -1
      : a.timestampMicros > b.timestampMicros ? 1 : 0));
    const lines = frames.map((f, i) => frameToJsonLine(f, i, options));
    segments.push({
      segmentId,
      frames: frames.length,
      jsonl: lines.join("\n") + "\n",
    });
  }
  return { segments, skippedRecords: skipped, warnings };
}
