import { describe, expect, it } from 'vitest';

import { activeModifications, defaultProfile, withFieldEdit } from '../src/state.js';

describe('activeModifications', () => {
  it('empty panel sends no modifications', () => {
    expect(activeModifications(defaultProfile(), {})).toEqual({});
  });

  it('drops values equal to the base profile', () => {
    const base = defaultProfile();
    expect(activeModifications(base, { bmi: base.bmi, daytime_dozing: true })).toEqual({
      daytime_dozing: true,
    });
  });

  it('quitting smoking marks the person a previous smoker', () => {
    const base = {
      ...defaultProfile(),
      currently_smoking: true,
      pack_years: 20,
    };
    expect(activeModifications(base, { currently_smoking: false })).toEqual({
      currently_smoking: false,
      previous_smoker: true,
    });
  });

  it('never-smokers toggling on smoking need no flag fix', () => {
    const base = defaultProfile();
    expect(activeModifications(base, { currently_smoking: true })).toEqual({
      currently_smoking: true,
    });
  });
});

describe('withFieldEdit', () => {
  it('coerces numeric input strings', () => {
    const next = withFieldEdit(defaultProfile(), 'bmi', '31.4');
    expect(next.bmi).toBe(31.4);
  });

  it('zeroes pack-years when both smoking flags go off', () => {
    let profile = { ...defaultProfile(), previous_smoker: true, pack_years: 12 };
    profile = withFieldEdit(profile, 'previous_smoker', false);
    expect(profile.pack_years).toBe(0);
  });

  it('does not mutate the input profile', () => {
    const base = defaultProfile();
    withFieldEdit(base, 'age', '70');
    expect(base.age).toBe(58);
  });
});
