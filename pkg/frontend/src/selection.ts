// Sticker selection with a hard cap of two; a third selection drops the
// oldest (FIFO) instead of being rejected.

export class StickerSelection {
  private readonly order: string[] = [];

  constructor(private readonly onChange?: (selected: string[]) => void) {}

  get selected(): string[] {
    return [...this.order];
  }

  has(id: string): boolean {
    return this.order.includes(id);
  }

  /** Toggle a sticker; selecting a third drops the earliest selection. */
  toggle(id: string): void {
    const idx = this.order.indexOf(id);
    if (idx >= 0) {
      this.order.splice(idx, 1);
    } else {
      this.order.push(id);
      while (this.order.length > 2) this.order.shift();
    }
    this.onChange?.(this.selected);
  }

  clear(): void {
    this.order.length = 0;
    this.onChange?.(this.selected);
  }
}
