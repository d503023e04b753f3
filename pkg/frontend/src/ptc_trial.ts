import type { Timeline } from './timeline.js';
import type { TrialDisplay } from './display.js';
import type { Answer, PtcTiming, QuestionPayload, TrialOutcome } from './types.js';

/** One plain-triplet trial: decoded images shown in place, a hold-to-toggle
 * swaps both sides to the source (with a label saying which is on screen),
 * transitions are rate-limited to `max_toggle_hz`, and submission stays
 * blocked until the observer has toggled at least `min_toggles` times.
 * The answer window is 30 s; the timeout emits no record.
 */
export class PtcTrial {
  private startedAt: number | null = null;
  private settled = false;
  private resolve: ((outcome: TrialOutcome) => void) | null = null;
  private windowHandle: number | null = null;

  private held = false;
  private showingSource = false;
  private lastTransitionAt = -Infinity;
  private pendingHandle: number | null = null;
  private toggledCount = 0;
  private selected: Answer | null = null;

  constructor(
    private readonly question: QuestionPayload,
    private readonly timing: PtcTiming,
    private readonly timeline: Timeline,
    private readonly display: TrialDisplay,
  ) {}

  private get minIntervalMs(): number {
    return 1000 / this.timing.max_toggle_hz;
  }

  get toggleCount(): number {
    return this.toggledCount;
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
      this.display.setPhase('test');
      this.display.setToggleLabel('distorted');
      this.startedAt = this.timeline.now();
      this.display.setAnswersEnabled(true);
      this.windowHandle = this.timeline.setTimeout(() => {
        this.finish({ kind: 'timeout', question_id: this.question.question_id });
      }, this.timing.answer_window_ms);
    });
  }

  /** Observer presses the toggle (pointerdown). */
  toggleDown(): void {
    if (!this.active) return;
    this.held = true;
    this.applyToggleState();
  }

  /** Observer releases the toggle (pointerup). */
  toggleUp(): void {
    if (!this.active) return;
    this.held = false;
    this.applyToggleState();
  }

  /** Pick (but do not submit) an answer. */
  selectAnswer(answer: Answer): void {
    if (!this.active) return;
    this.selected = answer;
  }

  /** Submit the selected answer; returns false when blocked by validation. */
  submit(): boolean {
    if (!this.active) return false;
    if (this.toggledCount < this.timing.min_toggles) {
      this.display.showValidationMessage(
        'Hold the toggle at least once to compare with the source before answering.',
      );
      return false;
    }
    if (this.selected === null) {
      this.display.showValidationMessage('Choose Left, Right, or Not sure first.');
      return false;
    }
    const elapsed = this.timeline.now() - (this.startedAt as number);
    this.finish({
      kind: 'answered',
      record: {
        question_id: this.question.question_id,
        answer: this.selected,
        response_time_ms: elapsed,
        toggled_count: this.toggledCount,
      },
    });
    return true;
  }

  private get active(): boolean {
    return this.startedAt !== null && !this.settled;
  }

  /** Drive the displayed state toward the held state, capped at max_toggle_hz.
   * A blocked transition is deferred to the earliest allowed instant rather
   * than dropped, so the screen always ends up matching the button. */
  private applyToggleState(): void {
    if (this.pendingHandle !== null) {
      this.timeline.clearTimeout(this.pendingHandle);
      this.pendingHandle = null;
    }
    if (this.held === this.showingSource) return;
    const now = this.timeline.now();
    const wait = this.lastTransitionAt + this.minIntervalMs - now;
    if (wait > 0) {
      this.pendingHandle = this.timeline.setTimeout(() => {
        this.pendingHandle = null;
        this.applyToggleState();
      }, wait);
      return;
    }
    this.showingSource = this.held;
    this.lastTransitionAt = now;
    this.display.setPhase(this.showingSource ? 'source' : 'test');
    this.display.setToggleLabel(this.showingSource ? 'source' : 'distorted');
    if (this.showingSource) this.toggledCount += 1;
  }

  private finish(outcome: TrialOutcome): void {
    if (this.settled) return;
    this.settled = true;
    if (this.windowHandle !== null) this.timeline.clearTimeout(this.windowHandle);
    if (this.pendingHandle !== null) this.timeline.clearTimeout(this.pendingHandle);
    this.display.setAnswersEnabled(false);
    this.display.clear();
    this.resolve?.(outcome);
  }
}
