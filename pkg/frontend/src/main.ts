/**
 * Browser entry point: WebSocket to the gateway, snapshots into the UI.
 *
 * Serve the simulator with `chamberline serve --port 8765`, open index.html,
 * and pass the port as ?port=8765 (defaults to 8765).
 */

import { Command, isProtocolError, parseServerMessage } from './protocol.js';
import { createKioskUi } from './ui.js';

const RECONNECT_DELAY_MS = 1000;

function gatewayUrl(): string {
  const params = new URLSearchParams(window.location.search);
  const host = params.get('host') ?? '127.0.0.1';
  const port = params.get('port') ?? '8765';
  return `ws://${host}:${port}/`;
}

function start(): void {
  const root = document.getElementById('app');
  if (!root) throw new Error('missing #app element');

  let socket: WebSocket | null = null;
  const send = (cmd: Command): void => {
    if (socket && socket.readyState === WebSocket.OPEN) {
      socket.send(JSON.stringify(cmd));
    }
  };
  const ui = createKioskUi(root, send);

  const connect = (): void => {
    socket = new WebSocket(gatewayUrl());
    socket.onopen = () => ui.setConnected(true);
    socket.onmessage = (event: MessageEvent<string>) => {
      const msg = parseServerMessage(event.data);
      if (isProtocolError(msg)) {
        ui.showError(msg);
      } else {
        ui.applySnapshot(msg);
      }
    };
    socket.onclose = () => {
      ui.setConnected(false);
      setTimeout(connect, RECONNECT_DELAY_MS);
    };
    socket.onerror = () => socket?.close();
  };
  connect();
}

start();
