// Live session: one ordered event stream folded into the store and scene.
//
// The server assigns dense event ids, so ordering is recoverable client-side:
// out-of-order arrivals are buffered, duplicates dropped, and a persistent
// hole in the sequence (or a transport reconnect, or any desync while
// folding) triggers exactly one snapshot refetch; further triggers while
// that fetch is in flight are coalesced into it.

import type {
  CommentDoc,
  ErrorDoc,
  EventDoc,
  JobDoc,
  ModelDoc,
  ServerMessage,
} from './protocol.js';
import { LAYER_DELETE, LAYER_HIGHLIGHT, isMutating } from './protocol.js';
import type { CanvasScene } from './canvas.js';
import { ModelStore, StoreDesyncError } from './store.js';

export interface SnapshotFetcher {
  (): Promise<{ version: number; model: ModelDoc }>;
}

export interface SessionOptions {
  store: ModelStore;
  scene: CanvasScene;
  fetchSnapshot: SnapshotFetcher;
  now?: () => number;
  /** Consecutive out-of-order arrivals tolerated before refetching. */
  gapStrikeLimit?: number;
  onChange?: () => void;
}

export class LiveSession {
  readonly store: ModelStore;
  readonly scene: CanvasScene;
  readonly comments: CommentDoc[] = [];
  readonly jobNotices: JobDoc[] = [];
  lastError: ErrorDoc | null = null;

  private readonly fetchSnapshot: SnapshotFetcher;
  private readonly now: () => number;
  private readonly gapStrikeLimit: number;
  private readonly onChange: () => void;

  private pending = new Map<number, EventDoc>();
  private gapStrikes = 0;
  private refetchInFlight = false;
  private snapshotFetches = 0;

  constructor(options: SessionOptions) {
    this.store = options.store;
    this.scene = options.scene;
    this.fetchSnapshot = options.fetchSnapshot;
    this.now = options.now ?? (() => Date.now());
    this.gapStrikeLimit = options.gapStrikeLimit ?? 3;
    this.onChange = options.onChange ?? (() => {});
  }

  /** How many snapshot refetches this session has issued. */
  get refetchCount(): number {
    return this.snapshotFetches;
  }

  handleMessage(msg: ServerMessage): void {
    switch (msg.type) {
      case 'snapshot':
        this.adoptSnapshot(msg.version, msg.payload.model);
        break;
      case 'event':
        this.handleEvent(msg.payload);
        break;
      case 'comment':
        this.comments.push(msg.payload);
        break;
      case 'job':
        this.jobNotices.push(msg.payload);
        break;
      case 'error':
        this.lastError = msg.payload;
        break;
    }
    this.onChange();
  }

  /** The transport dropped and reopened: discard local state, resync. */
  handleReconnect(): void {
    this.pending.clear();
    this.gapStrikes = 0;
    this.requestSnapshot();
  }

  private adoptSnapshot(version: number, model: ModelDoc): void {
    this.store.loadSnapshot(version, model);
    this.scene.clearTransient();
    this.refetchInFlight = false;
    this.gapStrikes = 0;
    // Events that raced ahead of the snapshot still apply on top of it.
    for (const id of [...this.pending.keys()].sort((a, b) => a - b)) {
      if (id <= version) this.pending.delete(id);
    }
    this.drainPending();
  }

  private handleEvent(event: EventDoc): void {
    if (event.kind === LAYER_HIGHLIGHT) {
      // Highlights share the current version and never enter the log.
      const payload = event.payload as { layer_id: string };
      this.scene.applyHighlight(payload.layer_id, event.author, this.now());
      return;
    }
    if (!isMutating(event)) return;
    if (event.event_id <= this.store.version || this.pending.has(event.event_id)) {
      return; // duplicate delivery
    }
    this.pending.set(event.event_id, event);
    if (!this.drainPending()) {
      this.gapStrikes += 1;
      if (this.gapStrikes >= this.gapStrikeLimit) this.requestSnapshot();
    }
  }

  /** Apply every buffered event that is next in line. True if any applied. */
  private drainPending(): boolean {
    let applied = false;
    let next = this.store.version + 1;
    while (this.pending.has(next)) {
      const event = this.pending.get(next)!;
      this.pending.delete(next);
      try {
        this.store.apply(event);
      } catch (err) {
        if (err instanceof StoreDesyncError) {
          this.requestSnapshot();
          return applied;
        }
        throw err;
      }
      if (event.kind === LAYER_DELETE) {
        this.scene.forget((event.payload as { layer_id: string }).layer_id);
      }
      applied = true;
      next = this.store.version + 1;
    }
    if (applied) this.gapStrikes = 0;
    return applied;
  }

  private requestSnapshot(): void {
    if (this.refetchInFlight) return;
    this.refetchInFlight = true;
    this.snapshotFetches += 1;
    void this.fetchSnapshot().then(
      (snap) => {
        this.adoptSnapshot(snap.version, snap.model);
        this.onChange();
      },
      () => {
        // Allow a later trigger to retry.
        this.refetchInFlight = false;
      },
    );
  }
}
