// Model store: a validation-free fold of accepted events over the snapshot.

import { describe, expect, it } from 'vitest';

import type { EventDoc, ModelDoc } from '../src/protocol.js';
import { ModelStore, StoreDesyncError } from '../src/store.js';

const SNAPSHOT: ModelDoc = {
  format_version: 1,
  name: 'demo',
  layers: [
    { id: 'in', type: 'Input', name: '', params: { dim: [3, 8, 8] }, position: null },
    { id: 'c', type: 'Convolution', name: 'first conv',
      params: { num_output: 8, kernel: [3] }, position: null },
  ],
  connections: [['in', 'c']],
};

function freshStore(): ModelStore {
  const store = new ModelStore();
  store.loadSnapshot(0, SNAPSHOT);
  return store;
}

function event(eventId: number, kind: EventDoc['kind'], payload: EventDoc['payload']): EventDoc {
  return { event_id: eventId, kind, payload, author: 'bo', base_version: eventId - 1, timestamp: 0 };
}

describe('event folding', () => {
  it('param_update rewrites one parameter and bumps the version', () => {
    const store = freshStore();
    store.apply(event(1, 'param_update', { layer_id: 'c', key: 'num_output', new_value: 32 }));
    expect(store.layer('c')?.params.num_output).toBe(32);
    expect(store.version).toBe(1);
  });

  it('the position key moves the node instead of touching params', () => {
    const store = freshStore();
    store.apply(event(1, 'param_update', { layer_id: 'c', key: 'position', new_value: [5, 9] }));
    expect(store.layer('c')?.position).toEqual([5, 9]);
    expect(store.layer('c')?.params.position).toBeUndefined();
  });

  it('layer_add appends the layer and its connections', () => {
    const store = freshStore();
    store.apply(event(1, 'layer_add', {
      layer: { id: 'r', type: 'ReLU' },
      connections: [['c', 'r']],
    }));
    expect(store.layerIds()).toEqual(['in', 'c', 'r']);
    expect(store.connectionList()).toEqual([['in', 'c'], ['c', 'r']]);
  });

  it('layer_delete removes the layer and every incident edge', () => {
    const store = freshStore();
    store.apply(event(1, 'layer_add', {
      layer: { id: 'r', type: 'ReLU' }, connections: [['c', 'r']],
    }));
    store.apply(event(2, 'layer_delete', { layer_id: 'c' }));
    expect(store.layerIds()).toEqual(['in', 'r']);
    expect(store.connectionList()).toEqual([]);
    expect(store.version).toBe(2);
  });

  it('revert swaps in the embedded document wholesale', () => {
    const store = freshStore();
    store.apply(event(1, 'param_update', { layer_id: 'c', key: 'num_output', new_value: 64 }));
    store.apply(event(2, 'revert', { to_version: 0, model: SNAPSHOT }));
    expect(store.layer('c')?.params.num_output).toBe(8);
    expect(store.version).toBe(2);
  });

  it('highlight events leave the model and version untouched', () => {
    const store = freshStore();
    store.apply(event(0, 'layer_highlight', { layer_id: 'c' }));
    expect(store.version).toBe(0);
    expect(store.toDoc()).toEqual(SNAPSHOT);
  });
});

describe('desync detection', () => {
  it('rejects updates to unknown layers', () => {
    const store = freshStore();
    expect(() =>
      store.apply(event(1, 'param_update', { layer_id: 'ghost', key: 'k', new_value: 1 })),
    ).toThrow(StoreDesyncError);
  });

  it('rejects deleting an unknown layer', () => {
    const store = freshStore();
    expect(() => store.apply(event(1, 'layer_delete', { layer_id: 'ghost' })))
      .toThrow(StoreDesyncError);
  });

  it('rejects re-adding an existing id', () => {
    const store = freshStore();
    expect(() => store.apply(event(1, 'layer_add', { layer: { id: 'c', type: 'ReLU' } })))
      .toThrow(StoreDesyncError);
  });
});

describe('document round trip', () => {
  it('toDoc mirrors the snapshot it was loaded from', () => {
    expect(freshStore().toDoc()).toEqual(SNAPSHOT);
  });

  it('copies are deep: mutating a returned layer leaves the store intact', () => {
    const store = freshStore();
    const layer = store.layerList()[0]!;
    layer.params.dim = [1];
    expect(store.layer('in')?.params.dim).toEqual([3, 8, 8]);
  });
});
