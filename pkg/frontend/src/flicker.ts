import type { Timeline } from './timeline.js';

export type FlickerPhase = 'source' | 'test';

/** Frame-driven source/test alternation shared by both sides of a triplet.
 *
 * One scheduler drives a single phase signal, so the two sides can never
 * desynchronize. Each phase lasts `phaseMs` (100 ms = a 10 Hz change rate,
 * one full cycle per 200 ms), starting with the source. Phase boundaries
 * advance by exact multiples of `phaseMs`, so the swap happens on the first
 * frame at or after the nominal boundary and error never accumulates.
 */
export class FlickerScheduler {
  private handle: number | null = null;
  private phase: FlickerPhase = 'source';
  private phaseStart = 0;

  constructor(
    private readonly timeline: Timeline,
    private readonly phaseMs: number,
    private readonly onPhase: (phase: FlickerPhase) => void,
  ) {}

  get running(): boolean {
    return this.handle !== null;
  }

  start(): void {
    if (this.handle !== null) return;
    this.phase = 'source';
    this.phaseStart = this.timeline.now();
    this.onPhase(this.phase);
    const tick = () => {
      const now = this.timeline.now();
      let flipped = false;
      while (now - this.phaseStart >= this.phaseMs) {
        this.phaseStart += this.phaseMs;
        this.phase = this.phase === 'source' ? 'test' : 'source';
        flipped = true;
      }
      if (flipped) this.onPhase(this.phase);
      this.handle = this.timeline.requestFrame(tick);
    };
    this.handle = this.timeline.requestFrame(tick);
  }

  stop(): void {
    if (this.handle === null) return;
    this.timeline.cancelFrame(this.handle);
    this.handle = null;
  }
}
