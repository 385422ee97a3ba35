/** All numbers shown in the UI flow through these formatters, so the
 * consistency tests can assert "displayed == service response" exactly. */

/** Risk probability -> percent with one decimal, e.g. 0.0359 -> "3.6%". */
export function formatRisk(risk: number): string {
  return `${(risk * 100).toFixed(1)}%`;
}

/** Risk change -> signed percentage points, e.g. -0.021 -> "-2.1 pp". */
export function formatDelta(delta: number): string {
  const points = delta * 100;
  const rounded = points.toFixed(1);
  const sign = rounded.startsWith('-') || Number(rounded) === 0 ? '' : '+';
  return `${sign}${rounded} pp`;
}

/** Log-hazard contribution, three decimals with explicit sign. */
export function formatContribution(value: number): string {
  const text = value.toFixed(3);
  return value >= 0 ? `+${text}` : text;
}

export function formatLinearPredictor(value: number): string {
  return value.toFixed(3);
}
