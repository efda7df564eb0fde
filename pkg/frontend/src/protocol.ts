/**
 * Wire protocol schemas, mirroring the Python service definitions.
 *
 * Golden files under ../protocol/golden/ pin the format for both sides;
 * the round-trip test in test/protocol.test.ts runs against them. Unknown
 * fields are rejected, matching the server's strict models.
 */

import { z } from "zod";

export const PROTOCOL_VERSION = 1;

const finite = z.number().finite();
const vec3 = z.tuple([z.number(), z.number(), z.number()]);
const finiteVec3 = z.tuple([finite, finite, finite]);
const cellIndex = z.tuple([z.number().int(), z.number().int(), z.number().int()]);

export type Vec3 = z.infer<typeof vec3>;

// Shape keys are declared in golden-file order so JSON.stringify of a
// parsed message reproduces the canonical layout.
export const JoySchema = z
  .object({
    type: z.literal("joy"),
    version: z.number().int().default(PROTOCOL_VERSION),
    t: finite,
    v: finiteVec3,
    yaw_rate: finite.default(0),
  })
  .strict();

export const TelemetrySchema = z
  .object({
    type: z.literal("telemetry"),
    version: z.number().int().default(PROTOCOL_VERSION),
    t: z.number(),
    p: vec3,
    v: vec3,
    yaw: z.number(),
    clearance: z.number(),
  })
  .strict();

export const ScanSchema = z
  .object({
    type: z.literal("scan"),
    version: z.number().int().default(PROTOCOL_VERSION),
    t: z.number(),
    points: z.array(vec3),
  })
  .strict();

export const MapPatchSchema = z
  .object({
    type: z.literal("map_patch"),
    version: z.number().int().default(PROTOCOL_VERSION),
    t: z.number(),
    cells: z.array(z.tuple([cellIndex, z.number().int()])),
  })
  .strict();

export const PathSchema = z
  .object({
    type: z.literal("path"),
    version: z.number().int().default(PROTOCOL_VERSION),
    t: z.number(),
    p_inf: z.array(vec3),
    p_no_inf: z.array(vec3),
    goal: vec3,
    yaw_ref: z.number(),
  })
  .strict();

export const SfcSchema = z
  .object({
    type: z.literal("sfc"),
    version: z.number().int().default(PROTOCOL_VERSION),
    t: z.number(),
    C: z.array(vec3),
    d: z.array(z.number()),
  })
  .strict();

export const EventSchema = z
  .object({
    type: z.literal("event"),
    version: z.number().int().default(PROTOCOL_VERSION),
    t: z.number(),
    name: z.string(),
    detail: z.string().default(""),
  })
  .strict();

export const MessageSchema = z.discriminatedUnion("type", [
  JoySchema,
  TelemetrySchema,
  ScanSchema,
  MapPatchSchema,
  PathSchema,
  SfcSchema,
  EventSchema,
]);

export type JoyMessage = z.infer<typeof JoySchema>;
export type TelemetryMessage = z.infer<typeof TelemetrySchema>;
export type ScanMessage = z.infer<typeof ScanSchema>;
export type MapPatchMessage = z.infer<typeof MapPatchSchema>;
export type PathMessage = z.infer<typeof PathSchema>;
export type SfcMessage = z.infer<typeof SfcSchema>;
export type EventMessage = z.infer<typeof EventSchema>;
export type Message = z.infer<typeof MessageSchema>;

export const MESSAGE_TYPES = [
  "joy",
  "telemetry",
  "scan",
  "map_patch",
  "path",
  "sfc",
  "event",
] as const;

/** Validate one wire message; throws ZodError on schema violations. */
export function parseMessage(text: string): Message {
  return MessageSchema.parse(JSON.parse(text));
}

export function dumpMessage(msg: Message): string {
  // Re-validate on the way out: a hand-built message with NaN axes must
  // never reach the wire (JSON.stringify would silently emit null).
  return JSON.stringify(MessageSchema.parse(msg));
}
