import type { Timeline } from '../src/timeline.js';

interface Scheduled {
  handle: number;
  at: number;
  callback: () => void;
}

/** Deterministic timeline: frames fire at a fixed fps, timeouts at exact
 * deadlines, and time only advances through step()/advance(). */
export class FakeTimeline implements Timeline {
  private time = 0;
  private nextHandle = 1;
  private frames: Array<{ handle: number; callback: (t: number) => void }> = [];
  private timeouts: Scheduled[] = [];

  constructor(readonly frameMs = 1000 / 60) {}

  now(): number {
    return this.time;
  }

  requestFrame(callback: (time: number) => void): number {
    const handle = this.nextHandle++;
    this.frames.push({ handle, callback });
    return handle;
  }

  cancelFrame(handle: number): void {
    this.frames = this.frames.filter((f) => f.handle !== handle);
  }

  setTimeout(callback: () => void, delayMs: number): number {
    const handle = this.nextHandle++;
    this.timeouts.push({ handle, at: this.time + delayMs, callback });
    return handle;
  }

  clearTimeout(handle: number): void {
    this.timeouts = this.timeouts.filter((t) => t.handle !== handle);
  }

  /** Advance to the next frame boundary, firing due timeouts first. */
  step(): void {
    const target = this.time + this.frameMs;
    this.fireTimeoutsUpTo(target);
    this.time = target;
    const due = this.frames;
    this.frames = [];
    for (const frame of due) frame.callback(this.time);
  }

  /** Step whole frames until at least `ms` of time has passed. */
  advance(ms: number): void {
    const target = this.time + ms;
    while (this.time < target) this.step();
  }

  private fireTimeoutsUpTo(target: number): void {
    for (;;) {
      const due = this.timeouts
        .filter((t) => t.at <= target)
        .sort((a, b) => a.at - b.at)[0];
      if (!due) return;
      this.timeouts = this.timeouts.filter((t) => t.handle !== due.handle);
      this.time = Math.max(this.time, due.at);
      due.callback();
    }
  }
}
