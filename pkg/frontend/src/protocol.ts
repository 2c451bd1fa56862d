// Wire types for the model service: REST payloads, the live session stream,
// and the client actions it accepts. These mirror the server's JSON exactly;
// the guards below are the only runtime validation the client performs.

export type Framework = 'caffe' | 'keras';

export type ParamValue = number | string | boolean | number[] | null;

export interface LayerDoc {
  id: string;
  type: string;
  name: string;
  params: Record<string, ParamValue>;
  position: [number, number] | null;
}

export interface ModelDoc {
  format_version: number;
  name: string;
  layers: LayerDoc[];
  connections: [string, string][];
}

export interface LayoutDoc {
  positions: Record<string, [number, number]>;
  paths: { from: string; to: string; points: [number, number][] }[];
}

export const PARAM_UPDATE = 'param_update';
export const LAYER_ADD = 'layer_add';
export const LAYER_DELETE = 'layer_delete';
export const LAYER_HIGHLIGHT = 'layer_highlight';
export const REVERT = 'revert';

export type EventKind =
  | typeof PARAM_UPDATE
  | typeof LAYER_ADD
  | typeof LAYER_DELETE
  | typeof LAYER_HIGHLIGHT
  | typeof REVERT;

// Highlights are broadcast but never enter the log or bump the version.
export const MUTATING_KINDS: readonly EventKind[] = [
  PARAM_UPDATE, LAYER_ADD, LAYER_DELETE, REVERT,
];

export interface ParamUpdatePayload {
  layer_id: string;
  key: string;
  new_value: ParamValue | [number, number];
}

export interface LayerAddPayload {
  layer: {
    id: string;
    type: string;
    name?: string;
    params?: Record<string, ParamValue>;
    position?: [number, number] | null;
  };
  connections?: [string, string][];
}

export interface LayerDeletePayload {
  layer_id: string;
}

export interface LayerHighlightPayload {
  layer_id: string;
}

export interface RevertPayload {
  to_version: number;
  model: ModelDoc;
}

export interface EventDoc {
  event_id: number;
  kind: EventKind;
  payload:
    | ParamUpdatePayload
    | LayerAddPayload
    | LayerDeletePayload
    | LayerHighlightPayload
    | RevertPayload;
  author: string;
  base_version: number;
  timestamp: number;
}

export interface CommentDoc {
  comment_id: string;
  model_id: string;
  anchor: string; // layer id, or "model" for whole-model comments
  text: string;
  author: string;
  timestamp: number;
  orphaned: boolean;
}

export interface JobDoc {
  job_id: string;
  model_id: string;
  target: Framework;
  state: 'pending' | 'running' | 'done' | 'failed';
  error: string | null;
  created: number;
  started: number | null;
  finished: number | null;
}

export interface ErrorDoc {
  error: string;
  detail: string;
}

// Every stream frame is {type, version, payload}.
export interface SnapshotMessage {
  type: 'snapshot';
  version: number;
  payload: { model: ModelDoc };
}

export interface EventMessage {
  type: 'event';
  version: number;
  payload: EventDoc;
}

export interface CommentMessage {
  type: 'comment';
  version: number;
  payload: CommentDoc;
}

export interface JobMessage {
  type: 'job';
  version: number;
  payload: JobDoc;
}

export interface ErrorMessage {
  type: 'error';
  version: number;
  payload: ErrorDoc;
}

export type ServerMessage =
  | SnapshotMessage
  | EventMessage
  | CommentMessage
  | JobMessage
  | ErrorMessage;

export interface SubmitAction {
  action: 'submit';
  event: {
    kind: Exclude<EventKind, typeof REVERT>; // the server mints reverts itself
    payload: EventDoc['payload'];
    base_version: number;
    author?: string;
  };
}

export interface CommentAction {
  action: 'comment';
  anchor: string;
  text: string;
}

export interface RevertAction {
  action: 'revert';
  to_version: number;
}

export interface ReplayRequestAction {
  action: 'replay_request';
  version: number;
}

export type ClientAction =
  | SubmitAction
  | CommentAction
  | RevertAction
  | ReplayRequestAction;

export interface ImportResponse {
  model_id: string;
  diagnostics: { severity: string; message: string }[];
  layout: LayoutDoc;
}

export interface ModelResponse {
  model_id: string;
  version: number;
  model: ModelDoc;
}

function isRecord(value: unknown): value is Record<string, unknown> {
  return typeof value === 'object' && value !== null && !Array.isArray(value);
}

export function isModelDoc(value: unknown): value is ModelDoc {
  if (!isRecord(value) || !Array.isArray(value.layers)) return false;
  if (!Array.isArray(value.connections)) return false;
  return value.layers.every(
    (entry) => isRecord(entry) && typeof entry.id === 'string' && typeof entry.type === 'string',
  );
}

export function isServerMessage(value: unknown): value is ServerMessage {
  if (!isRecord(value) || typeof value.version !== 'number') return false;
  if (!isRecord(value.payload)) return false;
  return (
    value.type === 'snapshot' ||
    value.type === 'event' ||
    value.type === 'comment' ||
    value.type === 'job' ||
    value.type === 'error'
  );
}

export function isSnapshotMessage(msg: ServerMessage): msg is SnapshotMessage {
  return msg.type === 'snapshot' && isModelDoc(msg.payload.model);
}

export function isEventMessage(msg: ServerMessage): msg is EventMessage {
  if (msg.type !== 'event') return false;
  const event = msg.payload as Partial<EventDoc>;
  return (
    typeof event.event_id === 'number' &&
    typeof event.kind === 'string' &&
    [PARAM_UPDATE, LAYER_ADD, LAYER_DELETE, LAYER_HIGHLIGHT, REVERT].includes(event.kind)
  );
}

export function isMutating(event: EventDoc): boolean {
  return MUTATING_KINDS.includes(event.kind);
}
