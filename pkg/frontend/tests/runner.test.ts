import { describe, expect, it } from 'vitest';

import { StudyApiClient } from '../src/api.js';
import { BtcTrial } from '../src/btc_trial.js';
import { PtcTrial } from '../src/ptc_trial.js';
import { runSession, SessionEvent } from '../src/runner.js';
import { BTC_TIMING, PTC_TIMING, QuestionPayload } from '../src/types.js';
import { FakeTimeline } from './fake_timeline.js';
import { RecordingDisplay } from './recording_display.js';

function question(id: string, protocol: 'BTC' | 'PTC'): QuestionPayload {
  return {
    done: false,
    question_id: id,
    protocol,
    index: 0,
    total: 2,
    timing: protocol === 'BTC' ? BTC_TIMING : PTC_TIMING,
    left_url: `/stimuli/${id}/left.png`,
    right_url: `/stimuli/${id}/right.png`,
    source_url: `/stimuli/${id}/source.png`,
  };
}

/** Service double: serves the first unanswered question, records submissions. */
class FakeService {
  submitted: Array<Record<string, unknown>> = [];
  failSubmissions = 0;

  constructor(private pending: QuestionPayload[]) {}

  fetch = async (url: string, init?: RequestInit): Promise<Response> => {
    if (url.endsWith('/next')) {
      if (this.pending.length === 0) {
        return Response.json({ done: true, answered: this.submitted.length, total: 2 });
      }
      return Response.json(this.pending[0]);
    }
    if (url.endsWith('/responses')) {
      if (this.failSubmissions > 0) {
        this.failSubmissions -= 1;
        throw new TypeError('network down');
      }
      const record = JSON.parse(String(init?.body));
      this.submitted.push(record);
      this.pending = this.pending.filter((q) => q.question_id !== record.question_id);
      return Response.json({ status: 'ok' });
    }
    throw new Error(`unexpected url ${url}`);
  };
}

function autopilot(timeline: FakeTimeline) {
  // answer every trial shortly after it starts
  return (event: SessionEvent) => {
    if (event.kind !== 'trial') return;
    timeline.setTimeout(() => {
      if (event.trial instanceof BtcTrial) {
        event.trial.answer('left');
      } else if (event.trial instanceof PtcTrial) {
        event.trial.toggleDown();
        timeline.setTimeout(() => {
          (event.trial as PtcTrial).toggleUp();
          (event.trial as PtcTrial).selectAnswer('right');
          (event.trial as PtcTrial).submit();
        }, 700);
      }
    }, 300);
  };
}

async function drive(session: Promise<void>, timeline: FakeTimeline, ms = 60000) {
  // interleave fake time with the microtask queue until the session settles
  let settled = false;
  void session.finally(() => {
    settled = true;
  });
  const deadline = timeline.now() + ms;
  while (!settled && timeline.now() < deadline) {
    timeline.advance(timeline.frameMs);
    await Promise.resolve();
    await Promise.resolve();
    await Promise.resolve();
  }
  await session;
}

describe('runSession', () => {
  it('runs both protocols end to end and submits valid records', async () => {
    const service = new FakeService([question('q1', 'BTC'), question('q2', 'PTC')]);
    const api = new StudyApiClient('', service.fetch, 0, 0);
    const timeline = new FakeTimeline();
    const display = new RecordingDisplay(() => timeline.now());
    const events: SessionEvent[] = [];
    const pilot = autopilot(timeline);

    await drive(
      runSession({
        api,
        assignmentId: 'a1',
        timeline,
        display,
        loader: async () => undefined,
        onEvent: (e) => {
          events.push(e);
          pilot(e);
        },
      }),
      timeline,
    );

    expect(service.submitted.map((r) => r.question_id)).toEqual(['q1', 'q2']);
    expect(service.submitted[0]).not.toHaveProperty('toggled_count');
    expect(service.submitted[1].toggled_count).toBe(1);
    expect(events.at(-1)).toEqual({ kind: 'done', answered: 2, total: 2 });
  });

  it('reports a skip and stops when stimuli cannot be preloaded', async () => {
    const service = new FakeService([question('q1', 'BTC')]);
    const api = new StudyApiClient('', service.fetch, 0, 0);
    const timeline = new FakeTimeline();
    const display = new RecordingDisplay(() => timeline.now());
    const events: SessionEvent[] = [];

    await runSession({
      api,
      assignmentId: 'a1',
      timeline,
      display,
      loader: async (url) => {
        if (url.includes('right')) throw new Error(`failed to preload ${url}`);
      },
      onEvent: (e) => events.push(e),
    });

    const kinds = events.map((e) => e.kind);
    expect(kinds).toContain('skipped');
    expect(kinds.at(-1)).toBe('aborted');
    expect(service.submitted).toHaveLength(0);
  });

  it('retries submissions over transient network failures', async () => {
    const service = new FakeService([question('q1', 'BTC')]);
    service.failSubmissions = 1;
    const api = new StudyApiClient('', service.fetch, 2, 0);
    const timeline = new FakeTimeline();
    const display = new RecordingDisplay(() => timeline.now());
    const pilot = autopilot(timeline);

    await drive(
      runSession({
        api,
        assignmentId: 'a1',
        timeline,
        display,
        loader: async () => undefined,
        onEvent: pilot,
      }),
      timeline,
    );

    expect(service.submitted).toHaveLength(1);
  });

  it('re-serves a timed-out question until it is answered', async () => {
    const service = new FakeService([question('q1', 'BTC')]);
    const api = new StudyApiClient('', service.fetch, 0, 0);
    const timeline = new FakeTimeline();
    const display = new RecordingDisplay(() => timeline.now());
    const events: SessionEvent[] = [];
    let trials = 0;

    await drive(
      runSession({
        api,
        assignmentId: 'a1',
        timeline,
        display,
        loader: async () => undefined,
        onEvent: (e) => {
          events.push(e);
          if (e.kind === 'trial') {
            trials += 1;
            if (trials === 2) {
              // answer only the second encounter; the first times out
              timeline.setTimeout(() => (e.trial as BtcTrial).answer('left'), 200);
            }
          }
        },
      }),
      timeline,
      40000,
    );

    expect(events.filter((e) => e.kind === 'timeout')).toHaveLength(1);
    expect(service.submitted).toHaveLength(1);
  });
});
