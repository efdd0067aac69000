/**
 * Gateway wire protocol: snapshot shapes and command builders.
 *
 * The gateway pushes full-state snapshots (on change plus a 250 ms
 * heartbeat) and accepts single-command JSON objects.  Errors come back as
 * {error, line} addressed to the offending client only.
 */

export interface BoothView {
  phase: string;
  lcd_rows: [string, string];
}

export interface DoctorView {
  lcd_rows: [string, string];
  last_latency_ms: number | null;
  last_frame_hex: string | null;
}

export interface QueueView {
  count: number;
  capacity: number;
  next_serial: number;
  serials: number[];
}

export interface LinkView {
  f_osc: number;
  baud: number;
  u2x: boolean;
  error_pct: number | null;
  usable: boolean;
}

export interface Snapshot {
  t_ms: number;
  booth: BoothView;
  doctor: DoctorView;
  queue: QueueView;
  link: LinkView;
}

export interface ProtocolError {
  error: string;
  line: number;
}

export type ServerMessage = Snapshot | ProtocolError;

export type Command =
  | { key: { k: string } }
  | { press_next: Record<string, never> }
  | { power_loss: Record<string, never> }
  | { set_temp_c: { v: number } }
  | { set_bpm: { v: number } }
  | { finger: { on: boolean } }
  | { pause: Record<string, never> }
  | { resume: Record<string, never> }
  | { step: { ms: number } }
  | { set_link: { f_osc: number; baud: number; u2x: boolean } };

export function isProtocolError(msg: ServerMessage): msg is ProtocolError {
  return 'error' in msg;
}

export function parseServerMessage(raw: string): ServerMessage {
  const msg = JSON.parse(raw) as ServerMessage;
  if (!isProtocolError(msg) && typeof (msg as Snapshot).t_ms !== 'number') {
    throw new Error('not a snapshot or error message');
  }
  return msg;
}

export const KEYPAD_LAYOUT: readonly (readonly string[])[] = [
  ['1', '2', '3', 'A'],
  ['4', '5', '6', 'B'],
  ['7', '8', '9', 'C'],
  ['*', '0', '#', 'D'],
];
