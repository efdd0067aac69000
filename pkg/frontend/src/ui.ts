/**
 * Dual-panel kiosk view: the patient's booth on the left, the doctor's desk
 * on the right, sensor and link controls underneath.
 *
 * The UI never updates itself optimistically.  Clicks only emit commands;
 * every pixel comes from the last snapshot the gateway pushed, so the DOM is
 * always an honest rendering of simulator state.
 */

import {
  Command,
  KEYPAD_LAYOUT,
  ProtocolError,
  Snapshot,
} from './protocol.js';

export type CommandSink = (cmd: Command) => void;

export interface KioskUi {
  /** Re-render from a fresh snapshot. */
  applySnapshot(snap: Snapshot): void;
  /** Surface a protocol error in the banner. */
  showError(err: ProtocolError): void;
  /** Connection indicator in the footer. */
  setConnected(up: boolean): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className: string,
  text = '',
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  node.className = className;
  if (text) node.textContent = text;
  return node;
}

// LCD rows render through one code path so both panels stay 16-char exact
function lcdPanel(doc: Document, idPrefix: string, title: string): HTMLElement {
  const panel = el(doc, 'div', 'lcd-panel');
  panel.appendChild(el(doc, 'h2', 'panel-title', title));
  const screen = el(doc, 'div', 'lcd');
  for (const row of [0, 1]) {
    const line = el(doc, 'pre', 'lcd-row', ' '.repeat(16));
    line.id = `${idPrefix}-row${row}`;
    screen.appendChild(line);
  }
  panel.appendChild(screen);
  return panel;
}

export function createKioskUi(root: HTMLElement, send: CommandSink): KioskUi {
  const doc = root.ownerDocument;
  root.textContent = '';

  const banner = el(doc, 'div', 'error-banner');
  banner.id = 'error-banner';
  banner.hidden = true;
  root.appendChild(banner);

  const panels = el(doc, 'div', 'panels');
  root.appendChild(panels);

  // -- booth side ----------------------------------------------------------

  const booth = lcdPanel(doc, 'booth', 'Registration Booth');
  const keypad = el(doc, 'div', 'keypad');
  for (const row of KEYPAD_LAYOUT) {
    for (const key of row) {
      const btn = el(doc, 'button', 'key', key);
      btn.dataset.key = key;
      btn.addEventListener('click', () => send({ key: { k: key } }));
      keypad.appendChild(btn);
    }
  }
  booth.appendChild(keypad);

  const sensors = el(doc, 'div', 'sensors');

  const finger = el(doc, 'button', 'finger', 'Finger: on sensor');
  finger.id = 'finger-toggle';
  finger.dataset.on = 'true';
  // finger truth is not part of snapshots, so this toggle keeps the one
  // client-side bit the UI owns
  finger.addEventListener('click', () => {
    send({ finger: { on: finger.dataset.on !== 'true' } });
    finger.dataset.on = finger.dataset.on === 'true' ? 'false' : 'true';
    finger.textContent = finger.dataset.on === 'true' ? 'Finger: on sensor' : 'Finger: lifted';
  });
  sensors.appendChild(finger);

  const tempLabel = el(doc, 'label', 'slider-label', 'Body temp 37.0 C');
  const temp = el(doc, 'input', 'slider');
  temp.id = 'temp-slider';
  temp.type = 'range';
  temp.min = '340';
  temp.max = '420';
  temp.value = '370';
  temp.addEventListener('change', () => {
    const deci = Number(temp.value);
    tempLabel.textContent = `Body temp ${(deci / 10).toFixed(1)} C`;
    send({ set_temp_c: { v: deci / 10 } });
  });
  sensors.appendChild(tempLabel);
  sensors.appendChild(temp);

  const bpmLabel = el(doc, 'label', 'slider-label', 'True pulse 75 BPM');
  const bpm = el(doc, 'input', 'slider');
  bpm.id = 'bpm-slider';
  bpm.type = 'range';
  bpm.min = '40';
  bpm.max = '180';
  bpm.value = '75';
  bpm.addEventListener('change', () => {
    bpmLabel.textContent = `True pulse ${bpm.value} BPM`;
    send({ set_bpm: { v: Number(bpm.value) } });
  });
  sensors.appendChild(bpmLabel);
  sensors.appendChild(bpm);
  booth.appendChild(sensors);
  panels.appendChild(booth);

  // -- doctor side -----------------------------------------------------------

  const doctor = lcdPanel(doc, 'doctor', "Doctor's Desk");
  const controls = el(doc, 'div', 'doctor-controls');

  const next = el(doc, 'button', 'next', 'Next Patient');
  next.id = 'next-button';
  next.addEventListener('click', () => send({ press_next: {} }));
  controls.appendChild(next);

  const latency = el(doc, 'span', 'latency-badge', 'latency: --');
  latency.id = 'latency-badge';
  controls.appendChild(latency);

  const power = el(doc, 'button', 'power', 'Cut Power');
  power.id = 'power-button';
  power.addEventListener('click', () => send({ power_loss: {} }));
  controls.appendChild(power);

  doctor.appendChild(controls);
  panels.appendChild(doctor);

  // -- footer: queue and link status -------------------------------------------

  const footer = el(doc, 'div', 'footer');
  const queueStrip = el(doc, 'span', 'queue-strip', 'queue empty');
  queueStrip.id = 'queue-strip';
  footer.appendChild(queueStrip);

  const linkBadge = el(doc, 'span', 'link-badge link-up', 'link: --');
  linkBadge.id = 'link-badge';
  footer.appendChild(linkBadge);

  const conn = el(doc, 'span', 'conn-badge', 'connecting');
  conn.id = 'conn-badge';
  footer.appendChild(conn);

  const clock = el(doc, 'span', 'sim-clock', 't=0ms');
  clock.id = 'sim-clock';
  footer.appendChild(clock);
  root.appendChild(footer);

  const row = (prefix: string, i: number): HTMLElement =>
    doc.getElementById(`${prefix}-row${i}`) as HTMLElement;

  return {
    applySnapshot(snap: Snapshot): void {
      row('booth', 0).textContent = snap.booth.lcd_rows[0];
      row('booth', 1).textContent = snap.booth.lcd_rows[1];
      row('doctor', 0).textContent = snap.doctor.lcd_rows[0];
      row('doctor', 1).textContent = snap.doctor.lcd_rows[1];

      const ms = snap.doctor.last_latency_ms;
      latency.textContent = ms === null ? 'latency: --' : `latency: ${ms.toFixed(1)} ms`;

      queueStrip.textContent = snap.queue.count
        ? `waiting (${snap.queue.count}/${snap.queue.capacity}): ${snap.queue.serials.join(' ')}`
        : 'queue empty';

      const err = snap.link.error_pct;
      const pct = err === null ? 'unreachable' : `${err >= 0 ? '+' : ''}${err.toFixed(2)}%`;
      linkBadge.textContent = `link: ${snap.link.baud} bps ${pct}`;
      linkBadge.className = snap.link.usable ? 'link-badge link-up' : 'link-badge link-down';

      clock.textContent = `t=${snap.t_ms}ms`;
    },

    showError(err: ProtocolError): void {
      banner.hidden = false;
      banner.textContent = `gateway rejected message ${err.line}: ${err.error}`;
    },

    setConnected(up: boolean): void {
      conn.textContent = up ? 'connected' : 'disconnected';
      conn.className = up ? 'conn-badge conn-up' : 'conn-badge conn-down';
    },
  };
}
