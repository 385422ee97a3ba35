/** Client-side mirror of the service's 422 range rules (plus basic shape),
 * so bad input blocks submission with inline messages before any request. */

import type { FieldError, SubjectProfile } from './types.js';

const ETHNICITIES = ['white_or_other', 'asian', 'black'];

export function validateProfile(profile: SubjectProfile): FieldError[] {
  const errors: FieldError[] = [];
  if (!Number.isInteger(profile.age) || profile.age < 18) {
    errors.push({ field: 'age', message: 'must be a whole number of years, 18 or more' });
  }
  if (!(profile.waist_hip_ratio > 0) || !Number.isFinite(profile.waist_hip_ratio)) {
    errors.push({ field: 'waist_hip_ratio', message: 'must be greater than 0' });
  }
  if (!(profile.bmi > 0) || !Number.isFinite(profile.bmi)) {
    errors.push({ field: 'bmi', message: 'must be greater than 0' });
  }
  if (!(profile.pack_years >= 0) || !Number.isFinite(profile.pack_years)) {
    errors.push({ field: 'pack_years', message: 'must be 0 or more' });
  }
  if (!ETHNICITIES.includes(profile.ethnicity)) {
    errors.push({ field: 'ethnicity', message: `must be one of ${ETHNICITIES.join(', ')}` });
  }
  const neverSmoked = !profile.currently_smoking && !profile.previous_smoker;
  if (neverSmoked && profile.pack_years !== 0) {
    errors.push({ field: 'pack_years', message: 'must be 0 for never-smokers' });
  }
  return errors;
}

export function errorsByField(errors: FieldError[]): Map<string, string> {
  const map = new Map<string, string>();
  for (const error of errors) {
    if (!map.has(error.field)) map.set(error.field, error.message);
  }
  return map;
}
