import { describe, expect, it } from 'vitest';

import { FlickerScheduler } from '../src/flicker.js';
import { FakeTimeline } from './fake_timeline.js';

describe('FlickerScheduler', () => {
  it('alternates at 100 ms per phase within one frame of nominal', () => {
    const timeline = new FakeTimeline(1000 / 60);
    const swaps: Array<{ at: number; phase: string }> = [];
    const flicker = new FlickerScheduler(timeline, 100, (phase) =>
      swaps.push({ at: timeline.now(), phase }),
    );
    flicker.start();
    timeline.advance(8000);
    flicker.stop();

    // instrumented frame log over the 8 s display window
    expect(swaps.length).toBeGreaterThanOrEqual(79);
    for (let i = 1; i < swaps.length; i += 1) {
      const nominal = i * 100;
      expect(Math.abs(swaps[i].at - swaps[0].at - nominal)).toBeLessThanOrEqual(
        timeline.frameMs,
      );
    }
  });

  it('starts with the source and strictly alternates', () => {
    const timeline = new FakeTimeline();
    const phases: string[] = [];
    const flicker = new FlickerScheduler(timeline, 100, (p) => phases.push(p));
    flicker.start();
    timeline.advance(1000);
    flicker.stop();
    expect(phases[0]).toBe('source');
    for (let i = 1; i < phases.length; i += 1) {
      expect(phases[i]).not.toBe(phases[i - 1]);
    }
  });

  it('one scheduler drives both sides, so phases cannot diverge', () => {
    const timeline = new FakeTimeline();
    const left: string[] = [];
    const right: string[] = [];
    const flicker = new FlickerScheduler(timeline, 100, (p) => {
      left.push(p);
      right.push(p);
    });
    flicker.start();
    timeline.advance(2000);
    flicker.stop();
    expect(left).toEqual(right);
  });

  it('emits nothing after stop', () => {
    const timeline = new FakeTimeline();
    const phases: string[] = [];
    const flicker = new FlickerScheduler(timeline, 100, (p) => phases.push(p));
    flicker.start();
    timeline.advance(250);
    flicker.stop();
    const count = phases.length;
    timeline.advance(1000);
    expect(phases.length).toBe(count);
  });

  it('catches up without drift when frames stall', () => {
    const timeline = new FakeTimeline(250); // heavily janky display
    const swaps: Array<{ at: number; phase: string }> = [];
    const flicker = new FlickerScheduler(timeline, 100, (phase) =>
      swaps.push({ at: timeline.now(), phase }),
    );
    flicker.start();
    timeline.advance(1000);
    flicker.stop();
    // phase boundaries advance by exact multiples of 100 ms internally, so
    // the parity of the displayed phase stays correct after a stall
    const last = swaps[swaps.length - 1];
    const phasesElapsed = Math.floor((last.at - swaps[0].at) / 100);
    expect(last.phase).toBe(phasesElapsed % 2 === 0 ? 'source' : 'test');
  });
});
