/** Clock + scheduler abstraction so trial timing is testable and drift-free.
 *
 * Trials never read Date.now() directly: everything flows through a Timeline,
 * which the browser backs with performance.now()/requestAnimationFrame and
 * tests back with a manually stepped frame loop.
 */

export interface Timeline {
  now(): number;
  requestFrame(callback: (time: number) => void): number;
  cancelFrame(handle: number): void;
  setTimeout(callback: () => void, delayMs: number): number;
  clearTimeout(handle: number): void;
}

export class BrowserTimeline implements Timeline {
  now(): number {
    return performance.now();
  }

  requestFrame(callback: (time: number) => void): number {
    return requestAnimationFrame(callback);
  }

  cancelFrame(handle: number): void {
    cancelAnimationFrame(handle);
  }

  setTimeout(callback: () => void, delayMs: number): number {
    return window.setTimeout(callback, delayMs);
  }

  clearTimeout(handle: number): void {
    window.clearTimeout(handle);
  }
}
