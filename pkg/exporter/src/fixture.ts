/**
 * Builds the bundled three-frame record fixture used by the tests.
 *
 * The fixture is a small but complete drive: three 10 Hz frames with a
 * moving, slowly yawing ego pose, per-view camera image bytes, one tracked
 * vehicle (with acceleration metadata) and one pedestrian (without), so the
 * optional-field paths all get exercised. Regenerate with `npm run fixture`;
 * the output is deterministic.
 */

import * as fs from "fs";
import * as path from "path";

import { ProtoWriter } from "./proto";
import * as schema from "./schema";
import { writeRecords } from "./tfrecord";

/** Column-vector rigid transform: yaw rotation plus translation. */
function poseMatrix(yaw: number, x: number, y: number): number[] {
  const c = Math.cos(yaw);
  const s = Math.sin(yaw);
  return [
    c, -s, 0, x,
    s, c, 0, y,
    0, 0, 1, 0,
    0, 0, 0, 1,
  ];
}

function cameraImage(nameEnum: number, tag: string, vx?: number, vy?: number,
                     vz?: number): ProtoWriter {
  const image = new ProtoWriter()
    .varint(schema.CAMERA_IMAGE.NAME, nameEnum)
    .bytes(schema.CAMERA_IMAGE.IMAGE, new TextEncoder().encode(tag));
  if (vx !== undefined) {
    image.message(schema.CAMERA_IMAGE.VELOCITY, new ProtoWriter()
      .float(schema.VELOCITY.V_X, vx)
      .float(schema.VELOCITY.V_Y, vy ?? 0)
      .float(schema.VELOCITY.V_Z, vz ?? 0));
  }
  return image;
}

function vehicleLabel(tIndex: number): ProtoWriter {
  const box = new ProtoWriter()
    .double(schema.BOX.CENTER_X, 15.0 + 0.2 * tIndex)
    .double(schema.BOX.CENTER_Y, 0.5)
    .double(schema.BOX.CENTER_Z, 0.3)
    .double(schema.BOX.WIDTH, 2.1)
    .double(schema.BOX.LENGTH, 4.6)
    .double(schema.BOX.HEIGHT, 1.7)
    // -pi on the second frame exercises the (-pi, pi] wrap
    .double(schema.BOX.HEADING, tIndex === 1 ? -Math.PI : 0.05);
  const metadata = new ProtoWriter()
    .double(schema.METADATA.SPEED_X, 8.75)
    .double(schema.METADATA.SPEED_Y, 0.125)
    .double(schema.METADATA.ACCEL_X, -0.5)
    .double(schema.METADATA.ACCEL_Y, 0.0625)
    .double(schema.METADATA.SPEED_Z, 0.0)
    .double(schema.METADATA.ACCEL_Z, 0.0);
  return new ProtoWriter()
    .message(schema.LABEL.BOX, box)
    .message(schema.LABEL.METADATA, metadata)
    .varint(schema.LABEL.TYPE, 1)
    .string(schema.LABEL.ID, "veh-001");
}

function pedestrianLabel(): ProtoWriter {
  const box = new ProtoWriter()
    .double(schema.BOX.CENTER_X, 6.5)
    .double(schema.BOX.CENTER_Y, -3.25)
    .double(schema.BOX.CENTER_Z, 0.9)
    .double(schema.BOX.WIDTH, 0.75)
    .double(schema.BOX.LENGTH, 0.75)
    .double(schema.BOX.HEIGHT, 1.8)
    .double(schema.BOX.HEADING, 1.25);
  const metadata = new ProtoWriter()
    .double(schema.METADATA.SPEED_X, 0.5)
    .double(schema.METADATA.SPEED_Y, 1.25);
  return new ProtoWriter()
    .message(schema.LABEL.BOX, box)
    .message(schema.LABEL.METADATA, metadata)
    .varint(schema.LABEL.TYPE, 2)
    .string(schema.LABEL.ID, "ped-007");
}

export function buildFixtureRecord(): Uint8Array {
  const frames: Uint8Array[] = [];
  for (let t = 0; t < 3; t++) {
    const yaw = 0.01 * t;
    const frame = new ProtoWriter()
      .message(schema.FRAME.CONTEXT,
               new ProtoWriter().string(schema.CONTEXT.NAME, "fixture-0001"))
      .varint(schema.FRAME.TIMESTAMP_MICROS, 1550000000_000000 + t * 100000)
      .message(schema.FRAME.POSE, new ProtoWriter().packedDoubles(
        schema.POSE.TRANSFORM, poseMatrix(yaw, 100.0 + 0.875 * t, -20.0 + 0.0125 * t)));
    frame
      .message(schema.FRAME.IMAGES, cameraImage(1, `img-front-${t}`, 8.75, 0.125, 0))
      .message(schema.FRAME.IMAGES, cameraImage(2, `img-front-left-${t}`))
      .message(schema.FRAME.IMAGES, cameraImage(3, `img-front-right-${t}`))
      .message(schema.FRAME.IMAGES, cameraImage(4, `img-side-left-${t}`))
      .message(schema.FRAME.IMAGES, cameraImage(5, `img-side-right-${t}`));
    frame.message(schema.FRAME.LASER_LABELS, vehicleLabel(t));
    frame.message(schema.FRAME.LASER_LABELS, pedestrianLabel());
    frames.push(frame.finish());
  }
  return writeRecords(frames);
}

if (require.main === module) {
  const target = process.argv[2]
    ?? path.join(__dirname, "..", "fixtures", "segment-3frame.tfrecord");
  fs.mkdirSync(path.dirname(target), { recursive: true });
  fs.writeFileSync(target, buildFixtureRecord());
  console.log(`wrote ${target}`);
}
