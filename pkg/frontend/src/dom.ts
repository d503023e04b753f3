import type { TrialDisplay } from './display.js';
import type { FlickerPhase } from './flicker.js';

const BLANK_PIXEL =
  'data:image/gif;base64,R0lGODlhAQABAIAAAICAgAAAACH5BAAAAAAALAAAAAABAAEAAAICRAEAOw==';

/** Binds a trial to two <img> panes, a status label, and a message line.
 * Phase swaps only reassign preloaded image URLs, so no decode or network
 * work happens inside the flicker loop. */
export class DomDisplay implements TrialDisplay {
  private leftUrl = '';
  private rightUrl = '';
  private sourceUrl = '';

  constructor(
    private readonly left: HTMLImageElement,
    private readonly right: HTMLImageElement,
    private readonly answerButtons: HTMLButtonElement[],
    private readonly toggleLabel: HTMLElement,
    private readonly message: HTMLElement,
  ) {}

  showStimuli(leftUrl: string, rightUrl: string, sourceUrl: string): void {
    this.leftUrl = leftUrl;
    this.rightUrl = rightUrl;
    this.sourceUrl = sourceUrl;
    this.message.textContent = '';
    this.setPhase('test');
  }

  setPhase(phase: FlickerPhase): void {
    if (phase === 'source') {
      this.left.src = this.sourceUrl;
      this.right.src = this.sourceUrl;
    } else {
      this.left.src = this.leftUrl;
      this.right.src = this.rightUrl;
    }
  }

  showBlank(): void {
    this.left.src = BLANK_PIXEL;
    this.right.src = BLANK_PIXEL;
  }

  setAnswersEnabled(enabled: boolean): void {
    for (const button of this.answerButtons) button.disabled = !enabled;
  }

  setToggleLabel(label: 'source' | 'distorted'): void {
    this.toggleLabel.textContent = label;
  }

  showValidationMessage(message: string): void {
    this.message.textContent = message;
  }

  clear(): void {
    this.showBlank();
    this.toggleLabel.textContent = '';
  }
}

/** Warn when the 620x800 pair cannot be shown at 1:1 pixel scale. */
export function viewportWarning(
  width: number,
  height: number,
  stimulusWidth = 620,
  stimulusHeight = 800,
): string | null {
  if (width < 2 * stimulusWidth || height < stimulusHeight) {
    return (
      `Your window (${width}x${height}) cannot fit two ${stimulusWidth}x` +
      `${stimulusHeight} images at native scale; the browser would rescale them.`
    );
  }
  return null;
}
