/** Contribution bar chart: harmful log-hazard contributions extend right of
 * zero, protective ones left, with 95% CI whiskers derived from the model
 * metadata.  Pure layout functions feed a hand-rolled SVG renderer. */

import type { Contribution, CovariateMetadata } from './types.js';

export interface BarLayout {
  feature: string;
  label: string;
  contribution: number;
  whiskerLow: number;
  whiskerHigh: number;
}

/** CI of a contribution = coefficient CI scaled by the encoded value
 * (interval endpoints swap when the encoded value is negative). */
export function contributionInterval(
  contribution: Contribution,
  covariate: CovariateMetadata | undefined,
): [number, number] {
  if (!covariate) return [contribution.contribution, contribution.contribution];
  const a = covariate.ci_low * contribution.encoded;
  const b = covariate.ci_high * contribution.encoded;
  return a <= b ? [a, b] : [b, a];
}

export function layoutBars(
  contributions: Contribution[],
  covariates: CovariateMetadata[],
): BarLayout[] {
  const byName = new Map(covariates.map((c) => [c.name, c]));
  const bars = contributions.map((c) => {
    const [whiskerLow, whiskerHigh] = contributionInterval(c, byName.get(c.feature));
    return {
      feature: c.feature,
      label: c.label,
      contribution: c.contribution,
      whiskerLow,
      whiskerHigh,
    };
  });
  bars.sort((x, y) => y.contribution - x.contribution);
  return bars;
}

export function axisRange(bars: BarLayout[]): [number, number] {
  let low = 0;
  let high = 0;
  for (const bar of bars) {
    low = Math.min(low, bar.contribution, bar.whiskerLow);
    high = Math.max(high, bar.contribution, bar.whiskerHigh);
  }
  if (low === high) {
    low -= 0.1;
    high += 0.1;
  }
  const pad = 0.06 * (high - low);
  return [low - pad, high + pad];
}

const WIDTH = 640;
const ROW = 24;
const LABEL_W = 300;
const BAR_AREA = WIDTH - LABEL_W - 16;

function escapeXml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

export function renderChartSvg(bars: BarLayout[]): string {
  const [low, high] = axisRange(bars);
  const x = (value: number) => LABEL_W + ((value - low) / (high - low)) * BAR_AREA;
  const height = bars.length * ROW + 28;
  const parts: string[] = [
    `<svg viewBox="0 0 ${WIDTH} ${height}" role="img" aria-label="per-feature risk contributions">`,
    `<line x1="${x(0)}" y1="8" x2="${x(0)}" y2="${height - 20}" class="axis"/>`,
  ];
  bars.forEach((bar, index) => {
    const y = 12 + index * ROW;
    const mid = y + ROW / 2 - 4;
    const x0 = Math.min(x(0), x(bar.contribution));
    const width = Math.abs(x(bar.contribution) - x(0));
    const kind = bar.contribution < 0 ? 'protective' : bar.contribution > 0 ? 'harmful' : 'neutral';
    parts.push(
      `<text x="${LABEL_W - 8}" y="${mid + 4}" text-anchor="end" class="bar-label">${escapeXml(bar.label)}</text>`,
      `<rect x="${x0.toFixed(2)}" y="${mid - 6}" width="${Math.max(width, 0.5).toFixed(2)}" height="12" class="bar ${kind}"/>`,
      `<line x1="${x(bar.whiskerLow).toFixed(2)}" y1="${mid}" x2="${x(bar.whiskerHigh).toFixed(2)}" y2="${mid}" class="whisker"/>`,
      `<line x1="${x(bar.whiskerLow).toFixed(2)}" y1="${mid - 4}" x2="${x(bar.whiskerLow).toFixed(2)}" y2="${mid + 4}" class="whisker"/>`,
      `<line x1="${x(bar.whiskerHigh).toFixed(2)}" y1="${mid - 4}" x2="${x(bar.whiskerHigh).toFixed(2)}" y2="${mid + 4}" class="whisker"/>`,
    );
  });
  parts.push(
    `<text x="${x(0)}" y="${height - 6}" text-anchor="middle" class="axis-label">0 (log-hazard contribution)</text>`,
    '</svg>',
  );
  return parts.join('');
}

/** Semi-circular gauge for the headline risk percentage. */
export function renderGaugeSvg(risk: number, display: string): string {
  const clamped = Math.max(0, Math.min(1, risk));
  // emphasize the clinically relevant low range: sqrt scaling
  const fraction = Math.sqrt(clamped);
  const angle = Math.PI * (1 - fraction);
  const cx = 90;
  const cy = 88;
  const r = 70;
  const px = cx + r * Math.cos(angle);
  const py = cy - r * Math.sin(angle);
  const large = fraction > 0.5 ? 1 : 0;
  return [
    '<svg viewBox="0 0 180 100" role="img" aria-label="10-year risk gauge">',
    `<path d="M ${cx - r} ${cy} A ${r} ${r} 0 0 1 ${cx + r} ${cy}" class="gauge-track"/>`,
    `<path d="M ${cx - r} ${cy} A ${r} ${r} 0 ${large} 1 ${px.toFixed(2)} ${py.toFixed(2)}" class="gauge-fill"/>`,
    `<text x="${cx}" y="${cy - 14}" text-anchor="middle" class="gauge-value">${escapeXml(display)}</text>`,
    `<text x="${cx}" y="${cy - 1}" text-anchor="middle" class="gauge-caption">10-year risk</text>`,
    '</svg>',
  ].join('');
}
