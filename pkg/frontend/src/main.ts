import { StudyApiClient } from './api.js';
import { BtcTrial } from './btc_trial.js';
import { DomDisplay, viewportWarning } from './dom.js';
import { PtcTrial } from './ptc_trial.js';
import { browserImageLoader } from './preload.js';
import { runSession } from './runner.js';
import { BrowserTimeline } from './timeline.js';
import type { Answer } from './types.js';

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

async function start(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const workerId = params.get('worker') ?? `anon-${Math.random().toString(36).slice(2, 10)}`;
  const base = params.get('service') ?? '';

  const status = el<HTMLElement>('status');
  const warning = viewportWarning(window.innerWidth, window.innerHeight);
  if (warning) el<HTMLElement>('message').textContent = warning;

  const display = new DomDisplay(
    el<HTMLImageElement>('left-image'),
    el<HTMLImageElement>('right-image'),
    ['answer-left', 'answer-right', 'answer-not-sure', 'ptc-submit'].map((id) =>
      el<HTMLButtonElement>(id),
    ),
    el<HTMLElement>('toggle-label'),
    el<HTMLElement>('message'),
  );
  display.setAnswersEnabled(false);

  const api = new StudyApiClient(base);
  const timeline = new BrowserTimeline();
  const assignment = await api.openAssignment(workerId);
  status.textContent = `assignment ${assignment.assignment_id}: ${assignment.n_questions} questions`;

  let current: BtcTrial | PtcTrial | null = null;
  const answer = (a: Answer) => {
    if (current instanceof BtcTrial) current.answer(a);
    else if (current instanceof PtcTrial) {
      current.selectAnswer(a);
      current.submit();
    }
  };
  el<HTMLButtonElement>('answer-left').addEventListener('click', () => answer('left'));
  el<HTMLButtonElement>('answer-right').addEventListener('click', () => answer('right'));
  el<HTMLButtonElement>('answer-not-sure').addEventListener('click', () => answer('not_sure'));
  el<HTMLButtonElement>('ptc-submit').addEventListener('click', () => {
    if (current instanceof PtcTrial) current.submit();
  });
  const toggle = el<HTMLButtonElement>('ptc-toggle');
  toggle.addEventListener('pointerdown', () => {
    if (current instanceof PtcTrial) current.toggleDown();
  });
  const release = () => {
    if (current instanceof PtcTrial) current.toggleUp();
  };
  toggle.addEventListener('pointerup', release);
  toggle.addEventListener('pointerleave', release);

  await runSession({
    api,
    assignmentId: assignment.assignment_id,
    timeline,
    display,
    loader: browserImageLoader,
    onEvent: (event) => {
      switch (event.kind) {
        case 'trial':
          current = event.trial;
          document.body.dataset.protocol = event.question.protocol;
          status.textContent = `question ${event.question.index + 1} of ${event.question.total}`;
          break;
        case 'timeout':
          status.textContent = 'time ran out, showing the next triplet';
          break;
        case 'skipped':
          status.textContent = `question skipped: ${event.reason}`;
          break;
        case 'done':
          current = null;
          status.textContent = `all ${event.total} questions answered, thank you!`;
          break;
        case 'aborted':
          current = null;
          status.textContent = `session ended: ${event.reason}`;
          break;
      }
    },
  });
}

start().catch((error) => {
  el<HTMLElement>('status').textContent = `error: ${error.message ?? error}`;
});
