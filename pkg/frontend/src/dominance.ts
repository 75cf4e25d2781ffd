/** Client-side Pareto dominance, used for display classification only.
 *
 * The rules mirror the service's comparator exactly: x dominates y when
 * x >= y on every coordinate and x > y on at least one. Equal vectors do
 * not dominate each other, so duplicated points all stay non-dominated.
 * Authoritative state lives in the service; this module just decides which
 * points to draw white (non-dominated) and which black (dominated).
 */

export type Relation = "equal" | "dominates" | "dominated_by" | "incomparable";

export function compare(x: readonly number[], y: readonly number[]): Relation {
  if (x.length !== y.length) {
    throw new Error(`dimension mismatch: ${x.length} vs ${y.length}`);
  }
  let someGreater = false;
  let someLess = false;
  for (let i = 0; i < x.length; i++) {
    if (x[i]! > y[i]!) someGreater = true;
    else if (x[i]! < y[i]!) someLess = true;
  }
  if (someGreater && someLess) return "incomparable";
  if (someGreater) return "dominates";
  if (someLess) return "dominated_by";
  return "equal";
}

export function dominates(x: readonly number[], y: readonly number[]): boolean {
  return compare(x, y) === "dominates";
}

/** Indexes (array positions) of the points no other point dominates. */
export function nonDominatedIndexes(points: readonly (readonly number[])[]): Set<number> {
  const keep = new Set<number>();
  outer: for (let i = 0; i < points.length; i++) {
    for (let j = 0; j < points.length; j++) {
      if (j !== i && dominates(points[j]!, points[i]!)) continue outer;
    }
    keep.add(i);
  }
  return keep;
}

/** Option indexes (the service's `index` field) that are non-dominated
 * within one presentation. */
export function frontOptionIndexes(
  options: readonly { index: number; theta: number[] }[],
): Set<number> {
  const positions = nonDominatedIndexes(options.map((o) => o.theta));
  const front = new Set<number>();
  positions.forEach((pos) => front.add(options[pos]!.index));
  return front;
}
