const BINARY = ["yes", "no", "notsure"];

/**
 * Key -> option map for a question's option list, in fixed option order.
 * The yes/no/notsure set gets y/n/u; anything else (the 5-way sentiment
 * set in particular) gets 1..n, so a 5-way card never shows a 3-way map.
 */
export function keymapFor(options: string[]): Record<string, string> {
  if (options.length === BINARY.length && options.every((o, i) => o === BINARY[i])) {
    return { y: "yes", n: "no", u: "notsure" };
  }
  const map: Record<string, string> = {};
  options.forEach((opt, i) => {
    map[String(i + 1)] = opt;
  });
  return map;
}

/** Inverse rendering helper: option -> displayed key label. */
export function keyLabels(options: string[]): Record<string, string> {
  const map = keymapFor(options);
  const labels: Record<string, string> = {};
  for (const [key, opt] of Object.entries(map)) {
    labels[opt] = key;
  }
  return labels;
}
