// Layer palette: presentation constants for the drag-and-drop sidebar.
// Colors and grouping mirror the server catalog; any type the server rejects
// comes back as a structured error toast, so no schema knowledge lives here
// beyond the defaults needed to make a freshly dropped layer acceptable.

import type { ParamValue, SubmitAction } from './protocol.js';
import { LAYER_ADD } from './protocol.js';

export interface PaletteEntry {
  type: string;
  color: string;
  category: string;
}

export const PALETTE: readonly PaletteEntry[] = [
  { type: 'Input', color: '#607d8b', category: 'Data' },
  { type: 'Convolution', color: '#3f51b5', category: 'Vision' },
  { type: 'Deconvolution', color: '#5c6bc0', category: 'Vision' },
  { type: 'Pooling', color: '#7986cb', category: 'Vision' },
  { type: 'InnerProduct', color: '#2196f3', category: 'Common' },
  { type: 'Dropout', color: '#42a5f5', category: 'Common' },
  { type: 'Embedding', color: '#1e88e5', category: 'Common' },
  { type: 'ReLU', color: '#4caf50', category: 'Activation/Neuron' },
  { type: 'Sigmoid', color: '#66bb6a', category: 'Activation/Neuron' },
  { type: 'Tanh', color: '#81c784', category: 'Activation/Neuron' },
  { type: 'Softmax', color: '#8bc34a', category: 'Activation/Neuron' },
  { type: 'SoftmaxWithLoss', color: '#e91e63', category: 'Loss' },
  { type: 'Accuracy', color: '#f44336', category: 'Loss' },
  { type: 'LRN', color: '#ff9800', category: 'Normalization' },
  { type: 'BatchNorm', color: '#ffb74d', category: 'Normalization' },
  { type: 'Scale', color: '#ffa726', category: 'Normalization' },
  { type: 'Concat', color: '#009688', category: 'Utility' },
  { type: 'Eltwise', color: '#26a69a', category: 'Utility' },
  { type: 'Flatten', color: '#4db6ac', category: 'Utility' },
  { type: 'Reshape', color: '#80cbc4', category: 'Utility' },
  { type: 'Python', color: '#9e9e9e', category: 'Utility' },
  { type: 'RNN', color: '#9c27b0', category: 'Recurrent' },
  { type: 'LSTM', color: '#ab47bc', category: 'Recurrent' },
  { type: 'GRU', color: '#ba68c8', category: 'Recurrent' },
];

const COLOR_BY_TYPE = new Map(PALETTE.map((entry) => [entry.type, entry.color]));
const FALLBACK_COLOR = '#9e9e9e';

export function colorFor(layerType: string): string {
  return COLOR_BY_TYPE.get(layerType) ?? FALLBACK_COLOR;
}

export function paletteByCategory(): Map<string, PaletteEntry[]> {
  const grouped = new Map<string, PaletteEntry[]>();
  for (const entry of PALETTE) {
    const bucket = grouped.get(entry.category);
    if (bucket) bucket.push(entry);
    else grouped.set(entry.category, [entry]);
  }
  return grouped;
}

// Just enough to make a dropped layer land; the side pane edits the rest.
const DROP_DEFAULTS: Record<string, Record<string, ParamValue>> = {
  Input: { dim: [3, 224, 224] },
  Convolution: { num_output: 1, kernel: [3] },
  Deconvolution: { num_output: 1, kernel: [3] },
  Pooling: { pool: 'MAX', kernel: [2], stride: [2] },
  InnerProduct: { num_output: 1 },
  Embedding: { vocab: 2, dim: 1 },
  RNN: { num_output: 1 },
  LSTM: { num_output: 1 },
  GRU: { num_output: 1 },
};

/**
 * Build the submit action for dropping a palette entry on the canvas.
 *
 * When an anchor is given the new layer chains onto it; on an empty canvas
 * the layer starts the network. The drop point becomes the position hint so
 * collaborators see the node where it landed.
 */
export function paletteDropAction(
  layerType: string,
  layerId: string,
  baseVersion: number,
  anchorId: string | null,
  dropPoint?: [number, number],
): SubmitAction {
  return {
    action: 'submit',
    event: {
      kind: LAYER_ADD,
      payload: {
        layer: {
          id: layerId,
          type: layerType,
          params: { ...(DROP_DEFAULTS[layerType] ?? {}) },
          position: dropPoint ?? null,
        },
        connections: anchorId ? [[anchorId, layerId]] : [],
      },
      base_version: baseVersion,
    },
  };
}
