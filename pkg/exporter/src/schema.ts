/**
 * Field-number map for the supported subset of the driving segment record.
 *
 * One record file holds one segment; each framed payload is one Frame
 * message. The numbering below mirrors the public open-dataset layout for
 * the fields this exporter consumes; anything else in a record is ignored
 * (standard proto3 behavior), so richer real-world records still convert as
 * long as these field numbers line up.
 *
 *   Frame:
 *     1  context        message { 1: name (string) }
 *     2  timestamp_micros varint (int64)
 *     3  pose           message { 1: repeated double transform } -- 16
 *                       values, row-major 4x4, column-vector convention
 *                       (translation in the last column)
 *     4  images         repeated message CameraImage
 *     6  laser_labels   repeated message Label
 *
 *   CameraImage:
 *     1  name           enum (CameraName)
 *     2  image          bytes (encoded camera image)
 *     4  velocity       message { 1: v_x, 2: v_y, 3: v_z (float, m/s,
 *                       global frame) } -- the ego velocity channel
 *
 *   Label:
 *     1  box            message { 1: center_x, 2: center_y, 3: center_z,
 *                       4: width, 5: length, 6: height, 7: heading }
 *                       (double, vehicle frame)
 *     2  metadata       message { 1: speed_x, 2: speed_y, 3: accel_x,
 *                       4: accel_y, 5: speed_z, 6: accel_z } (double)
 *     3  type           enum (0 unknown, 1 vehicle, 2 pedestrian, 3 sign,
 *                       4 cyclist)
 *     4  id             string
 */

export const FRAME = {
  CONTEXT: 1,
  TIMESTAMP_MICROS: 2,
  POSE: 3,
  IMAGES: 4,
  LASER_LABELS: 6,
} as const;

export const CONTEXT = { NAME: 1 } as const;

export const POSE = { TRANSFORM: 1 } as const;

export const CAMERA_IMAGE = {
  NAME: 1,
  IMAGE: 2,
  VELOCITY: 4,
} as const;

export const VELOCITY = { V_X: 1, V_Y: 2, V_Z: 3 } as const;

export const LABEL = {
  BOX: 1,
  METADATA: 2,
  TYPE: 3,
  ID: 4,
} as const;

export const BOX = {
  CENTER_X: 1,
  CENTER_Y: 2,
  CENTER_Z: 3,
  WIDTH: 4,
  LENGTH: 5,
  HEIGHT: 6,
  HEADING: 7,
} as const;

export const METADATA = {
  SPEED_X: 1,
  SPEED_Y: 2,
  ACCEL_X: 3,
  ACCEL_Y: 4,
  SPEED_Z: 5,
  ACCEL_Z: 6,
} as const;

/** CameraName enum values to datamodel view names. */
export const CAMERA_NAMES: Record<number, string> = {
  1: "front",
  2: "front_left",
  3: "front_right",
  4: "side_left",
  5: "side_right",
};

/** Label type enum values to datamodel object types. */
export const LABEL_TYPES: Record<number, string> = {
  0: "unknown",
  1: "vehicle",
  2: "pedestrian",
  3: "sign",
  4: "cyclist",
};
