/** Trailing-edge debouncer: one call fires per quiet window of `delayMs`. */
export class Debouncer<A extends unknown[]> {
  private handle: ReturnType<typeof setTimeout> | null = null;
  private pendingArgs: A | null = null;

  constructor(
    private callback: (...args: A) => void,
    private delayMs = 150,
  ) {}

  post(...args: A): void {
    this.pendingArgs = args;
    if (this.handle !== null) clearTimeout(this.handle);
    this.handle = setTimeout(() => this.fire(), this.delayMs);
  }

  private fire(): void {
    this.handle = null;
    const args = this.pendingArgs;
    this.pendingArgs = null;
    if (args) this.callback(...args);
  }

  cancel(): void {
    if (this.handle !== null) clearTimeout(this.handle);
    this.handle = null;
    this.pendingArgs = null;
  }
}

/**
 * Guards against stale responses: every request takes a sequence number and
 * only the response matching the newest issued request may render.
 */
export class StaleGuard {
  private newest = 0;
  private lastAccepted = 0;

  issue(): number {
    return ++this.newest;
  }

  accept(seq: number): boolean {
    if (seq !== this.newest || seq <= this.lastAccepted) return false;
    this.lastAccepted = seq;
    return true;
  }
}
