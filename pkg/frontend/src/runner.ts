import { StudyApiClient } from './api.js';
import { BtcTrial } from './btc_trial.js';
import { PtcTrial } from './ptc_trial.js';
import type { TrialDisplay } from './display.js';
import type { ImageLoader } from './preload.js';
import { preloadAll } from './preload.js';
import type { Timeline } from './timeline.js';
import type { BtcTiming, PtcTiming, QuestionPayload, TrialOutcome } from './types.js';

export type SessionEvent =
  | { kind: 'question'; question: QuestionPayload }
  | { kind: 'trial'; trial: BtcTrial | PtcTrial; question: QuestionPayload }
  | { kind: 'answered'; question_id: string }
  | { kind: 'timeout'; question_id: string }
  | { kind: 'skipped'; question_id: string; reason: string }
  | { kind: 'done'; answered: number; total: number }
  | { kind: 'aborted'; reason: string };

export interface SessionOptions {
  api: StudyApiClient;
  assignmentId: string;
  timeline: Timeline;
  display: TrialDisplay;
  loader: ImageLoader;
  onEvent?: (event: SessionEvent) => void;
  preloadAttempts?: number;
}

/** Drive one assignment from first question to completion.
 *
 * The service always serves the first unanswered question, so a timeout
 * simply re-runs the same triplet, and a question whose assets cannot be
 * preloaded (after retrying) ends the session with a skip report -- the
 * API has no skip endpoint.
 */
export async function runSession(options: SessionOptions): Promise<void> {
  const emit = options.onEvent ?? (() => undefined);
  const attempts = options.preloadAttempts ?? 2;

  for (;;) {
    const next = await options.api.nextQuestion(options.assignmentId);
    if (next.done) {
      emit({ kind: 'done', answered: next.answered, total: next.total });
      return;
    }
    const question = next;
    emit({ kind: 'question', question });

    let loaded = false;
    let failure = '';
    for (let attempt = 0; attempt < attempts && !loaded; attempt += 1) {
      try {
        await preloadAll(
          [question.left_url, question.right_url, question.source_url],
          options.loader,
        );
        loaded = true;
      } catch (error) {
        failure = error instanceof Error ? error.message : String(error);
      }
    }
    if (!loaded) {
      emit({ kind: 'skipped', question_id: question.question_id, reason: failure });
      emit({ kind: 'aborted', reason: `stimuli unavailable: ${failure}` });
      return;
    }

    let outcome: TrialOutcome;
    if (question.protocol === 'BTC') {
      const trial = new BtcTrial(
        question,
        question.timing as BtcTiming,
        options.timeline,
        options.display,
      );
      emit({ kind: 'trial', trial, question });
      outcome = await trial.run();
    } else {
      const trial = new PtcTrial(
        question,
        question.timing as PtcTiming,
        options.timeline,
        options.display,
      );
      emit({ kind: 'trial', trial, question });
      outcome = await trial.run();
    }

    if (outcome.kind === 'answered') {
      await options.api.submitResponse(options.assignmentId, outcome.record);
      emit({ kind: 'answered', question_id: outcome.record.question_id });
    } else {
      emit({ kind: 'timeout', question_id: outcome.question_id });
    }
  }
}
