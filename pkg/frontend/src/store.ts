// Client-side projection of the shared model. The server is the authority:
// this store only folds already-accepted events over the last snapshot, so it
// performs no validation beyond checking that targets still exist. A missing
// target means the local state has drifted and the session must resnapshot.

import type {
  EventDoc,
  LayerAddPayload,
  LayerDeletePayload,
  LayerDoc,
  ModelDoc,
  ParamUpdatePayload,
  ParamValue,
  RevertPayload,
} from './protocol.js';
import {
  LAYER_ADD,
  LAYER_DELETE,
  LAYER_HIGHLIGHT,
  PARAM_UPDATE,
  REVERT,
} from './protocol.js';

// param_update key reserved for canvas drag positions; not a schema param
export const POSITION_KEY = 'position';

export class StoreDesyncError extends Error {
  constructor(detail: string) {
    super(`local state diverged from server: ${detail}`);
    this.name = 'StoreDesyncError';
  }
}

function cloneLayer(layer: LayerDoc): LayerDoc {
  return {
    id: layer.id,
    type: layer.type,
    name: layer.name,
    params: { ...layer.params },
    position: layer.position ? [layer.position[0], layer.position[1]] : null,
  };
}

export class ModelStore {
  name = '';
  version = 0;
  private formatVersion = 1;
  private layers = new Map<string, LayerDoc>();
  private connections: [string, string][] = [];

  loadSnapshot(version: number, model: ModelDoc): void {
    this.name = model.name;
    this.version = version;
    this.formatVersion = model.format_version ?? 1;
    this.layers = new Map(model.layers.map((layer) => [layer.id, cloneLayer(layer)]));
    this.connections = model.connections.map(([from, to]) => [from, to]);
  }

  layer(id: string): LayerDoc | undefined {
    return this.layers.get(id);
  }

  layerIds(): string[] {
    return [...this.layers.keys()];
  }

  layerList(): LayerDoc[] {
    return [...this.layers.values()].map(cloneLayer);
  }

  connectionList(): [string, string][] {
    return this.connections.map(([from, to]) => [from, to]);
  }

  has(id: string): boolean {
    return this.layers.has(id);
  }

  /** Fold one accepted event; highlights leave the model untouched. */
  apply(event: EventDoc): void {
    switch (event.kind) {
      case PARAM_UPDATE:
        this.applyParamUpdate(event.payload as ParamUpdatePayload);
        break;
      case LAYER_ADD:
        this.applyLayerAdd(event.payload as LayerAddPayload);
        break;
      case LAYER_DELETE:
        this.applyLayerDelete(event.payload as LayerDeletePayload);
        break;
      case REVERT:
        this.loadSnapshot(event.event_id, (event.payload as RevertPayload).model);
        return; // loadSnapshot already set the version
      case LAYER_HIGHLIGHT:
        return; // transient; the canvas tracks it, the model does not
    }
    this.version = event.event_id;
  }

  private applyParamUpdate(payload: ParamUpdatePayload): void {
    const layer = this.layers.get(payload.layer_id);
    if (!layer) throw new StoreDesyncError(`no layer ${payload.layer_id}`);
    if (payload.key === POSITION_KEY) {
      const xy = payload.new_value as [number, number] | null;
      layer.position = xy ? [xy[0], xy[1]] : null;
    } else {
      layer.params[payload.key] = payload.new_value as ParamValue;
    }
  }

  private applyLayerAdd(payload: LayerAddPayload): void {
    const doc = payload.layer;
    if (this.layers.has(doc.id)) throw new StoreDesyncError(`duplicate layer ${doc.id}`);
    this.layers.set(doc.id, {
      id: doc.id,
      type: doc.type,
      name: doc.name ?? '',
      params: { ...(doc.params ?? {}) },
      position: doc.position ? [doc.position[0], doc.position[1]] : null,
    });
    for (const [from, to] of payload.connections ?? []) {
      if (!this.layers.has(from) || !this.layers.has(to)) {
        throw new StoreDesyncError(`connection ${from} -> ${to} references a missing layer`);
      }
      this.connections.push([from, to]);
    }
  }

  private applyLayerDelete(payload: LayerDeletePayload): void {
    if (!this.layers.delete(payload.layer_id)) {
      throw new StoreDesyncError(`no layer ${payload.layer_id}`);
    }
    this.connections = this.connections.filter(
      ([from, to]) => from !== payload.layer_id && to !== payload.layer_id,
    );
  }

  toDoc(): ModelDoc {
    return {
      format_version: this.formatVersion,
      name: this.name,
      layers: this.layerList(),
      connections: this.connectionList(),
    };
  }
}
