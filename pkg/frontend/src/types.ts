import { z } from 'zod';

export type Protocol = 'BTC' | 'PTC';
export type Answer = 'left' | 'right' | 'not_sure';

/** Timing parameters served by the study service per protocol. */
export interface BtcTiming {
  display_ms: number;
  blank_ms: number;
  answer_window_ms: number;
  flicker_phase_ms: number;
}

export interface PtcTiming {
  answer_window_ms: number;
  max_toggle_hz: number;
  min_toggles: number;
}

export const BTC_TIMING: BtcTiming = {
  display_ms: 8000,
  blank_ms: 3000,
  answer_window_ms: 11000,
  flicker_phase_ms: 100,
};

export const PTC_TIMING: PtcTiming = {
  answer_window_ms: 30000,
  max_toggle_hz: 2,
  min_toggles: 1,
};

/** Body of POST /assignments/{id}/responses, as the service validates it. */
export const responseRecordSchema = z
  .object({
    question_id: z.string().min(1),
    answer: z.enum(['left', 'right', 'not_sure']),
    response_time_ms: z.number().nonnegative().finite(),
    toggled_count: z.number().int().min(1).optional(),
  })
  .strict();

export type ResponseRecord = z.infer<typeof responseRecordSchema>;

export interface Assignment {
  assignment_id: string;
  worker_id: string;
  batch_ids: string[];
  n_questions: number;
  state: string;
}

export interface QuestionPayload {
  done: false;
  question_id: string;
  protocol: Protocol;
  index: number;
  total: number;
  timing: BtcTiming | PtcTiming;
  left_url: string;
  right_url: string;
  source_url: string;
}

export interface SessionDone {
  done: true;
  answered: number;
  total: number;
}

export type NextResponse = QuestionPayload | SessionDone;

export type TrialOutcome =
  | { kind: 'answered'; record: ResponseRecord }
  | { kind: 'timeout'; question_id: string };
