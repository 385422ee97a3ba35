/** Profile/what-if state transitions, kept pure for testing. */

import type { Modifications, SubjectProfile } from './types.js';

/** Reference subject: every indicator off, continuous at cohort medians. */
export function defaultProfile(): SubjectProfile {
  return {
    age: 58,
    waist_hip_ratio: 0.87,
    bmi: 26.57,
    ethnicity: 'white_or_other',
    degree: false,
    cvd_diagnosis: false,
    cholesterol_meds: false,
    other_meds: false,
    stomach_pain: false,
    daytime_dozing: false,
    breathless_level_ground: false,
    diabetes_father: false,
    diabetes_mother: false,
    diabetes_siblings: false,
    alcohol_monthly_plus: false,
    currently_smoking: false,
    previous_smoker: false,
    pack_years: 0,
    good_health: false,
  };
}

/** Fields a person can steer in the what-if panel (server is authoritative;
 * this set is refreshed from /v1/model at startup). */
export const DEFAULT_MODIFIABLE = [
  'bmi',
  'waist_hip_ratio',
  'currently_smoking',
  'pack_years',
  'alcohol_monthly_plus',
  'daytime_dozing',
] as const;

/** Drop entries equal to the base profile so "no change" sends {}. */
export function activeModifications(
  base: SubjectProfile,
  panel: Modifications,
): Modifications {
  const mods: Modifications = {};
  for (const [field, value] of Object.entries(panel) as [
    keyof SubjectProfile,
    SubjectProfile[keyof SubjectProfile],
  ][]) {
    if (value !== undefined && value !== base[field]) {
      (mods as Record<string, unknown>)[field] = value;
    }
  }
  // quitting smoking keeps pack-years history valid only for ex-smokers
  if (mods.currently_smoking === false && base.currently_smoking && base.pack_years > 0) {
    mods.previous_smoker = true;
  }
  return mods;
}

/** Apply a single field edit, coercing numeric inputs. */
export function withFieldEdit(
  profile: SubjectProfile,
  field: keyof SubjectProfile,
  raw: string | boolean,
): SubjectProfile {
  const next = { ...profile };
  if (typeof raw === 'boolean') {
    (next as Record<string, unknown>)[field] = raw;
  } else if (field === 'ethnicity') {
    next.ethnicity = raw as SubjectProfile['ethnicity'];
  } else if (field === 'age') {
    next.age = Number(raw);
  } else {
    (next as Record<string, unknown>)[field] = Number(raw);
  }
  // a never-smoker who reports either flag off stays consistent only at 0
  if (field === 'currently_smoking' || field === 'previous_smoker') {
    if (!next.currently_smoking && !next.previous_smoker) next.pack_years = 0;
  }
  return next;
}
