import type { Answer } from './types.js';
import type { FlickerPhase } from './flicker.js';

/** What a trial needs from the screen; the DOM binding implements this and
 * tests substitute a recording double. */
export interface TrialDisplay {
  /** Render the two test stimuli side by side (they are already preloaded). */
  showStimuli(leftUrl: string, rightUrl: string, sourceUrl: string): void;
  /** Swap both sides between the shared source and their test images. */
  setPhase(phase: FlickerPhase): void;
  /** Mid-gray blank between display and the end of the answer window. */
  showBlank(): void;
  setAnswersEnabled(enabled: boolean): void;
  /** PTC: whether the currently displayed images are distorted or the source. */
  setToggleLabel(label: 'source' | 'distorted'): void;
  /** PTC: inline validation feedback (e.g. submit before any toggle). */
  showValidationMessage(message: string): void;
  clear(): void;
}

export interface AnswerControls {
  onAnswer(handler: (answer: Answer) => void): void;
}
