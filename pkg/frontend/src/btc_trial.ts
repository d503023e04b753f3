import type { Timeline } from './timeline.js';
import type { TrialDisplay } from './display.js';
import { FlickerScheduler } from './flicker.js';
import type { Answer, BtcTiming, QuestionPayload, TrialOutcome } from './types.js';

/** One boosted-triplet trial: flickered side-by-side display for 8 s, blank
 * for 3 s, answer accepted at any moment inside the 11 s window. Answering
 * ends the trial immediately; the timeout emits no record.
 *
 * Answer controls only become actionable after the stimuli are rendered,
 * and calls before `run()` are ignored.
 */
export class BtcTrial {
  private startedAt: number | null = null;
  private settled = false;
  private resolve: ((outcome: TrialOutcome) => void) | null = null;
  private readonly flicker: FlickerScheduler;
  private blankHandle: number | null = null;
  private windowHandle: number | null = null;

  constructor(
    private readonly question: QuestionPayload,
    private readonly timing: BtcTiming,
    private readonly timeline: Timeline,
    private readonly display: TrialDisplay,
  ) {
    this.flicker = new FlickerScheduler(timeline, timing.flicker_phase_ms, (phase) =>
      this.display.setPhase(phase),
    );
  }

  run(): Promise<TrialOutcome> {
    if (this.startedAt !== null) throw new Error('trial already started');
    return new Promise((resolve) => {
      this.resolve = resolve;
      this.display.showStimuli(
        this.question.left_url,
        this.question.right_url,
        this.question.source_url,
      );
      this.startedAt = this.timeline.now();
      this.display.setAnswersEnabled(true);
      this.flicker.start();
      this.blankHandle = this.timeline.setTimeout(() => {
        this.flicker.stop();
        this.display.showBlank();
      }, this.timing.display_ms);
      this.windowHandle = this.timeline.setTimeout(() => {
        this.finish({ kind: 'timeout', question_id: this.question.question_id });
      }, this.timing.answer_window_ms);
    });
  }

  answer(answer: Answer): void {
    if (this.startedAt === null || this.settled) return;
    const elapsed = this.timeline.now() - this.startedAt;
    this.finish({
      kind: 'answered',
      record: {
        question_id: this.question.question_id,
        answer,
        response_time_ms: elapsed,
      },
    });
  }

  private finish(outcome: TrialOutcome): void {
    if (this.settled) return;
    this.settled = true;
    this.flicker.stop();
    if (this.blankHandle !== null) this.timeline.clearTimeout(this.blankHandle);
    if (this.windowHandle !== null) this.timeline.clearTimeout(this.windowHandle);
    this.display.setAnswersEnabled(false);
    this.display.clear();
    this.resolve?.(outcome);
  }
}
