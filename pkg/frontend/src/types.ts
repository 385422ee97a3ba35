/** API payload shapes; mirrors docs/api/*.schema.json on the service side. */

export type EthnicityToken = 'white_or_other' | 'asian' | 'black';

export interface SubjectProfile {
  age: number;
  waist_hip_ratio: number;
  bmi: number;
  ethnicity: EthnicityToken;
  degree: boolean;
  cvd_diagnosis: boolean;
  cholesterol_meds: boolean;
  other_meds: boolean;
  stomach_pain: boolean;
  daytime_dozing: boolean;
  breathless_level_ground: boolean;
  diabetes_father: boolean;
  diabetes_mother: boolean;
  diabetes_siblings: boolean;
  alcohol_monthly_plus: boolean;
  currently_smoking: boolean;
  previous_smoker: boolean;
  pack_years: number;
  good_health: boolean;
}

export interface Contribution {
  feature: string;
  label: string;
  value: number;
  encoded: number;
  contribution: number;
  modifiable: boolean;
}

export interface RiskBreakdown {
  model_version: string;
  horizon_years: number;
  total_risk: number;
  linear_predictor: number;
  contributions: Contribution[];
  disclaimer: string;
}

export interface WhatIfResponse {
  model_version: string;
  before: RiskBreakdown;
  after: RiskBreakdown;
  delta: number;
  disclaimer: string;
}

export interface CovariateMetadata {
  name: string;
  label: string;
  coefficient: number;
  ci_low: number;
  ci_high: number;
  center: number;
  scale: number;
  continuous: boolean;
  modifiable: boolean;
}

export interface ModelMetadata {
  model_version: string;
  horizon_years: number;
  baseline_survival: number;
  calibration: Record<string, unknown>;
  covariates: CovariateMetadata[];
  disclaimer: string;
}

export interface FieldError {
  field: string;
  message: string;
}

export type Modifications = Partial<SubjectProfile>;
