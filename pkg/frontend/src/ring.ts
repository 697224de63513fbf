/** Fixed-capacity append-only buffer; oldest entries fall off the front. */
export class RingBuffer<T> {
  private items: T[] = [];

  constructor(readonly capacity: number) {
    if (capacity < 1) throw new Error("capacity must be >= 1");
  }

  push(item: T): void {
    this.items.push(item);
    if (this.items.length > this.capacity) {
      this.items.splice(0, this.items.length - this.capacity);
    }
  }

  get length(): number {
    return this.items.length;
  }

  /** Oldest to newest. */
  toArray(): readonly T[] {
    return this.items;
  }

  last(n: number): readonly T[] {
    return this.items.slice(-n);
  }

  clear(): void {
    this.items = [];
  }
}
