// Wire guards: the only place the client inspects raw JSON.

import { describe, expect, it } from 'vitest';

import {
  isEventMessage,
  isModelDoc,
  isMutating,
  isServerMessage,
  isSnapshotMessage,
  MUTATING_KINDS,
} from '../src/protocol.js';
import type { EventDoc, ServerMessage } from '../src/protocol.js';

const MODEL = {
  format_version: 1,
  name: 'm',
  layers: [{ id: 'a', type: 'ReLU', name: '', params: {}, position: null }],
  connections: [],
};

describe('isServerMessage', () => {
  it('accepts every frame type the server emits', () => {
    for (const type of ['snapshot', 'event', 'comment', 'job', 'error']) {
      expect(isServerMessage({ type, version: 0, payload: {} })).toBe(true);
    }
  });

  it('rejects frames missing the envelope fields', () => {
    expect(isServerMessage(null)).toBe(false);
    expect(isServerMessage({ type: 'event' })).toBe(false);
    expect(isServerMessage({ type: 'event', version: '1', payload: {} })).toBe(false);
    expect(isServerMessage({ type: 'push', version: 1, payload: {} })).toBe(false);
  });
});

describe('payload guards', () => {
  it('snapshot frames must embed a model document', () => {
    const good: ServerMessage = {
      type: 'snapshot', version: 0, payload: { model: MODEL },
    };
    expect(isSnapshotMessage(good)).toBe(true);
    const bad = { type: 'snapshot', version: 0, payload: { model: { layers: 'nope' } } };
    expect(isSnapshotMessage(bad as unknown as ServerMessage)).toBe(false);
  });

  it('event frames must carry a known kind and numeric id', () => {
    const good: ServerMessage = {
      type: 'event',
      version: 1,
      payload: {
        event_id: 1, kind: 'param_update',
        payload: { layer_id: 'a', key: 'k', new_value: 1 },
        author: 'bo', base_version: 0, timestamp: 0,
      },
    };
    expect(isEventMessage(good)).toBe(true);
    const bad = {
      type: 'event', version: 1,
      payload: { event_id: 1, kind: 'rename', payload: {} },
    };
    expect(isEventMessage(bad as unknown as ServerMessage)).toBe(false);
  });

  it('model documents need ids and types on every layer', () => {
    expect(isModelDoc(MODEL)).toBe(true);
    expect(isModelDoc({ layers: [{ id: 'a' }], connections: [] })).toBe(false);
    expect(isModelDoc({ layers: {}, connections: [] })).toBe(false);
  });
});

describe('mutation classification', () => {
  it('highlights are the one broadcast kind that never mutates', () => {
    expect(MUTATING_KINDS).toEqual(['param_update', 'layer_add', 'layer_delete', 'revert']);
    const highlight = { kind: 'layer_highlight' } as EventDoc;
    expect(isMutating(highlight)).toBe(false);
    expect(isMutating({ kind: 'revert' } as EventDoc)).toBe(true);
  });
});
