import { describe, expect, it } from 'vitest';

import { defaultProfile } from '../src/state.js';
import { errorsByField, validateProfile } from '../src/validate.js';

describe('validateProfile', () => {
  it('accepts the reference profile', () => {
    expect(validateProfile(defaultProfile())).toEqual([]);
  });

  it('mirrors the service range rules', () => {
    const profile = { ...defaultProfile(), age: 17, bmi: -1, waist_hip_ratio: 0 };
    const fields = validateProfile(profile).map((e) => e.field);
    expect(fields).toContain('age');
    expect(fields).toContain('bmi');
    expect(fields).toContain('waist_hip_ratio');
  });

  it('rejects fractional age', () => {
    const errors = validateProfile({ ...defaultProfile(), age: 58.5 });
    expect(errors.map((e) => e.field)).toContain('age');
  });

  it('enforces the never-smoker pack-years rule', () => {
    const errors = validateProfile({ ...defaultProfile(), pack_years: 4 });
    expect(errors[0]?.field).toBe('pack_years');
    const fine = validateProfile({
      ...defaultProfile(),
      previous_smoker: true,
      pack_years: 4,
    });
    expect(fine).toEqual([]);
  });

  it('rejects unknown ethnicity tokens', () => {
    const profile = { ...defaultProfile(), ethnicity: 'martian' as never };
    expect(validateProfile(profile).map((e) => e.field)).toContain('ethnicity');
  });
});

describe('errorsByField', () => {
  it('keeps the first message per field', () => {
    const map = errorsByField([
      { field: 'bmi', message: 'first' },
      { field: 'bmi', message: 'second' },
    ]);
    expect(map.get('bmi')).toBe('first');
  });
});
