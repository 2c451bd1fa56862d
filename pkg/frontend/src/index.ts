export * from './protocol.js';
export * from './palette.js';
export * from './store.js';
export * from './canvas.js';
export * from './session.js';
