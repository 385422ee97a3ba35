import { describe, expect, it } from 'vitest';

import { axisRange, contributionInterval, layoutBars, renderChartSvg } from '../src/chart.js';
import type { Contribution, CovariateMetadata } from '../src/types.js';
import { loadModelMetadata, loadProfiles } from './helpers.js';

const model = loadModelMetadata();
const profile = loadProfiles()[0]!;

function covariate(name: string): CovariateMetadata {
  return model.covariates.find((c) => c.name === name)!;
}

function contribution(name: string): Contribution {
  return profile.score_response.contributions.find((c) => c.feature === name)!;
}

describe('contributionInterval', () => {
  it('scales the coefficient CI by the encoded value', () => {
    const c: Contribution = {
      feature: 'diabetes_mother',
      label: 'Diabetes in mother',
      value: 1,
      encoded: 1,
      contribution: 0.489,
      modifiable: false,
    };
    const [low, high] = contributionInterval(c, covariate('diabetes_mother'));
    expect(low).toBeCloseTo(0.443, 12);
    expect(high).toBeCloseTo(0.535, 12);
  });

  it('swaps endpoints for negative encoded values', () => {
    const c: Contribution = {
      feature: 'bmi',
      label: 'BMI',
      value: 20,
      encoded: -1.5,
      contribution: -1.5 * covariate('bmi').coefficient,
      modifiable: true,
    };
    const [low, high] = contributionInterval(c, covariate('bmi'));
    expect(low).toBeCloseTo(-1.5 * covariate('bmi').ci_high, 12);
    expect(high).toBeCloseTo(-1.5 * covariate('bmi').ci_low, 12);
    expect(low).toBeLessThanOrEqual(high);
  });
});

describe('layoutBars', () => {
  it('keeps every contribution and sorts harmful first', () => {
    const bars = layoutBars(profile.score_response.contributions, model.covariates);
    expect(bars.length).toBe(19);
    for (let i = 1; i < bars.length; i++) {
      expect(bars[i - 1]!.contribution).toBeGreaterThanOrEqual(bars[i]!.contribution);
    }
  });
});

describe('renderChartSvg', () => {
  it('renders protective bars for negative contributions', () => {
    const active = {
      ...contribution('alcohol_monthly_plus'),
      encoded: 1,
      contribution: covariate('alcohol_monthly_plus').coefficient, // -0.375
    };
    const svg = renderChartSvg(layoutBars([active], model.covariates));
    expect(svg).toContain('class="bar protective"');
  });

  it('renders zero contributions as neutral, at the axis', () => {
    const inactive = {
      ...contribution('diabetes_mother'),
      encoded: 0,
      contribution: 0,
    };
    const svg = renderChartSvg(layoutBars([inactive], model.covariates));
    expect(svg).toContain('class="bar neutral"');
  });

  it('escapes labels', () => {
    const weird: Contribution = {
      feature: 'x',
      label: 'a < b & "c"',
      value: 0,
      encoded: 0,
      contribution: 0.1,
      modifiable: false,
    };
    const svg = renderChartSvg(layoutBars([weird], []));
    expect(svg).toContain('a &lt; b &amp; &quot;c&quot;');
  });
});

describe('axisRange', () => {
  it('always brackets zero and every whisker', () => {
    const bars = layoutBars(profile.score_response.contributions, model.covariates);
    const [low, high] = axisRange(bars);
    expect(low).toBeLessThanOrEqual(0);
    expect(high).toBeGreaterThanOrEqual(0);
    for (const bar of bars) {
      expect(bar.whiskerLow).toBeGreaterThanOrEqual(low);
      expect(bar.whiskerHigh).toBeLessThanOrEqual(high);
    }
  });
});
