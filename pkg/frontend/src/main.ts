/** App wiring: profile form -> live risk, contribution chart, what-if panel.
 *
 * All numbers on screen come from service responses (single source of
 * truth); edits debounce at 250 ms and in-flight requests are superseded by
 * the newest one.
 */

import { ApiClient, ServiceError, resolveBaseUrl } from './api.js';
import { layoutBars, renderChartSvg, renderGaugeSvg } from './chart.js';
import { debounce } from './debounce.js';
import { formatContribution, formatDelta, formatLinearPredictor, formatRisk } from './format.js';
import { activeModifications, defaultProfile, withFieldEdit } from './state.js';
import type {
  ModelMetadata,
  Modifications,
  RiskBreakdown,
  SubjectProfile,
} from './types.js';
import { errorsByField, validateProfile } from './validate.js';

interface FieldSpec {
  name: keyof SubjectProfile;
  label: string;
  kind: 'int' | 'float' | 'bool' | 'ethnicity';
  step?: string;
  hint?: string;
}

const FIELDS: FieldSpec[] = [
  { name: 'age', label: 'Age (years)', kind: 'int' },
  { name: 'waist_hip_ratio', label: 'Waist/hip ratio', kind: 'float', step: '0.01' },
  { name: 'bmi', label: 'BMI (kg/m²)', kind: 'float', step: '0.1' },
  { name: 'ethnicity', label: 'Ethnicity', kind: 'ethnicity' },
  { name: 'degree', label: 'College/university degree', kind: 'bool' },
  { name: 'cvd_diagnosis', label: 'Ever diagnosed heart attack / angina / stroke / high blood pressure', kind: 'bool' },
  { name: 'cholesterol_meds', label: 'Takes cholesterol medication', kind: 'bool' },
  { name: 'other_meds', label: 'Takes other prescription medication', kind: 'bool' },
  { name: 'stomach_pain', label: 'Stomach or abdominal pain in last month', kind: 'bool' },
  { name: 'daytime_dozing', label: 'Dozes during the day', kind: 'bool' },
  { name: 'breathless_level_ground', label: 'Short of breath on level ground', kind: 'bool' },
  { name: 'diabetes_father', label: 'Father had diabetes', kind: 'bool' },
  { name: 'diabetes_mother', label: 'Mother had diabetes', kind: 'bool' },
  { name: 'diabetes_siblings', label: 'Sibling has diabetes', kind: 'bool' },
  { name: 'alcohol_monthly_plus', label: 'Drinks alcohol once a month or more', kind: 'bool' },
  { name: 'currently_smoking', label: 'Currently smokes', kind: 'bool' },
  { name: 'previous_smoker', label: 'Smoked in the past', kind: 'bool' },
  { name: 'pack_years', label: 'Smoking pack-years', kind: 'float', step: '0.5', hint: '0 unless an ever-smoker' },
  { name: 'good_health', label: 'Self-reported good or excellent health', kind: 'bool' },
];

interface WhatIfControl {
  name: keyof SubjectProfile;
  label: string;
  kind: 'slider' | 'toggle';
  min?: number;
  max?: number;
  step?: number;
}

const WHATIF_CONTROLS: WhatIfControl[] = [
  { name: 'bmi', label: 'BMI', kind: 'slider', min: 16, max: 45, step: 0.1 },
  { name: 'waist_hip_ratio', label: 'Waist/hip ratio', kind: 'slider', min: 0.6, max: 1.2, step: 0.01 },
  { name: 'pack_years', label: 'Pack-years', kind: 'slider', min: 0, max: 80, step: 0.5 },
  { name: 'currently_smoking', label: 'Currently smoking', kind: 'toggle' },
  { name: 'alcohol_monthly_plus', label: 'Alcohol monthly+', kind: 'toggle' },
  { name: 'daytime_dozing', label: 'Daytime dozing', kind: 'toggle' },
];

export class App {
  profile: SubjectProfile = defaultProfile();
  panel: Modifications = {};
  model: ModelMetadata | null = null;
  latest: RiskBreakdown | null = null;

  private readonly client: ApiClient;
  private readonly root: Document;
  private readonly requestScore: () => void;
  private readonly requestWhatIf: () => void;

  constructor(client: ApiClient, root: Document) {
    this.client = client;
    this.root = root;
    this.requestScore = debounce(() => void this.score(), 250);
    this.requestWhatIf = debounce(() => void this.whatif(), 250);
  }

  async start(): Promise<void> {
    this.renderForm();
    this.renderWhatIfPanel();
    try {
      this.model = await this.client.model();
      this.setStatus('');
    } catch {
      this.setStatus(`service unreachable at ${this.client.baseUrl}; start it with: t2drisk serve`);
      return;
    }
    this.applyModifiableFlags();
    await this.score();
    await this.whatif(); // renders the no-change state: delta 0
  }

  private element<T extends HTMLElement>(id: string): T {
    const node = this.root.getElementById(id);
    if (!node) throw new Error(`missing #${id}`);
    return node as T;
  }

  private setStatus(text: string): void {
    this.element('status').textContent = text;
  }

  // --- profile form ----------------------------------------------------------

  private renderForm(): void {
    const form = this.element<HTMLFormElement>('profile-form');
    form.replaceChildren();
    for (const spec of FIELDS) {
      const row = this.root.createElement('label');
      row.className = 'field';
      row.htmlFor = `field-${spec.name}`;
      const caption = this.root.createElement('span');
      caption.textContent = spec.label;
      row.append(caption);
      row.append(this.buildInput(spec));
      const message = this.root.createElement('em');
      message.className = 'field-error';
      message.id = `error-${spec.name}`;
      row.append(message);
      form.append(row);
    }
  }

  private buildInput(spec: FieldSpec): HTMLElement {
    if (spec.kind === 'ethnicity') {
      const select = this.root.createElement('select');
      select.id = `field-${spec.name}`;
      for (const token of ['white_or_other', 'asian', 'black']) {
        const option = this.root.createElement('option');
        option.value = token;
        option.textContent = token.replace(/_/g, ' ');
        select.append(option);
      }
      select.value = this.profile.ethnicity;
      select.addEventListener('change', () => this.onEdit(spec.name, select.value));
      return select;
    }
    if (spec.kind === 'bool') {
      const input = this.root.createElement('input');
      input.type = 'checkbox';
      input.id = `field-${spec.name}`;
      input.checked = Boolean(this.profile[spec.name]);
      input.addEventListener('change', () => this.onEdit(spec.name, input.checked));
      return input;
    }
    const input = this.root.createElement('input');
    input.type = 'number';
    input.id = `field-${spec.name}`;
    if (spec.step) input.step = spec.step;
    input.value = String(this.profile[spec.name]);
    if (spec.hint) input.title = spec.hint;
    input.addEventListener('input', () => this.onEdit(spec.name, input.value));
    return input;
  }

  private onEdit(field: keyof SubjectProfile, raw: string | boolean): void {
    this.profile = withFieldEdit(this.profile, field, raw);
    this.syncSmokingWidgets();
    const errors = errorsByField(validateProfile(this.profile));
    for (const spec of FIELDS) {
      this.element(`error-${spec.name}`).textContent = errors.get(spec.name) ?? '';
    }
    if (errors.size > 0) {
      this.setStatus('fix the highlighted fields to update the estimate');
      return;
    }
    this.setStatus('');
    this.requestScore();
    this.requestWhatIf();
  }

  /** Programmatic form fill (scripted flows, tests): scores immediately. */
  async applyProfile(profile: SubjectProfile, panel: Modifications = {}): Promise<void> {
    this.profile = { ...profile };
    this.panel = { ...panel };
    await this.score();
    await this.whatif();
  }

  private syncSmokingWidgets(): void {
    // withFieldEdit may clamp pack-years for never-smokers
    const packYears = this.root.getElementById(`field-pack_years`) as HTMLInputElement | null;
    if (packYears && Number(packYears.value) !== this.profile.pack_years) {
      packYears.value = String(this.profile.pack_years);
    }
  }

  // --- scoring ----------------------------------------------------------------

  private async score(): Promise<void> {
    let breakdown: RiskBreakdown | null;
    try {
      breakdown = await this.client.score(this.profile);
    } catch (error) {
      this.setStatus(error instanceof ServiceError ? error.message : String(error));
      return;
    }
    if (breakdown === null) return; // superseded by a newer edit
    this.latest = breakdown;
    this.renderRisk(breakdown);
    this.renderChart(breakdown);
    this.element('disclaimer').textContent = breakdown.disclaimer;
  }

  private renderRisk(breakdown: RiskBreakdown): void {
    this.element('gauge').innerHTML = renderGaugeSvg(
      breakdown.total_risk,
      formatRisk(breakdown.total_risk),
    );
    this.element('risk-value').textContent = formatRisk(breakdown.total_risk);
    this.element('risk-lp').textContent =
      `log-hazard sum ${formatLinearPredictor(breakdown.linear_predictor)} ` +
      `over ${breakdown.horizon_years} years (model ${breakdown.model_version})`;
  }

  private renderChart(breakdown: RiskBreakdown): void {
    const bars = layoutBars(breakdown.contributions, this.model?.covariates ?? []);
    this.element('chart').innerHTML = renderChartSvg(bars);
    const sum = breakdown.contributions.reduce((acc, c) => acc + c.contribution, 0);
    this.element('chart-sum').textContent =
      `contributions sum ${formatContribution(sum)} = linear predictor ` +
      `${formatLinearPredictor(breakdown.linear_predictor)}`;
  }

  // --- what-if panel ------------------------------------------------------------

  private renderWhatIfPanel(): void {
    const panel = this.element('whatif-controls');
    panel.replaceChildren();
    for (const control of WHATIF_CONTROLS) {
      const row = this.root.createElement('label');
      row.className = 'whatif-row';
      const caption = this.root.createElement('span');
      caption.textContent = control.label;
      row.append(caption);
      if (control.kind === 'slider') {
        const slider = this.root.createElement('input');
        slider.type = 'range';
        slider.id = `whatif-${control.name}`;
        slider.min = String(control.min);
        slider.max = String(control.max);
        slider.step = String(control.step);
        slider.value = String(this.profile[control.name]);
        const readout = this.root.createElement('output');
        readout.id = `whatif-${control.name}-value`;
        readout.textContent = slider.value;
        slider.addEventListener('input', () => {
          readout.textContent = slider.value;
          this.onPanelEdit(control.name, Number(slider.value));
        });
        row.append(slider, readout);
      } else {
        const toggle = this.root.createElement('input');
        toggle.type = 'checkbox';
        toggle.id = `whatif-${control.name}`;
        toggle.checked = Boolean(this.profile[control.name]);
        toggle.addEventListener('change', () =>
          this.onPanelEdit(control.name, toggle.checked),
        );
        row.append(toggle);
      }
      panel.append(row);
    }
    const note = this.element('whatif-note');
    note.textContent =
      'Only lifestyle-adjacent inputs can be explored here; the rest of the ' +
      'profile (age, ethnicity, family and medical history, self-reported ' +
      'health) is fixed by design.';
    this.element('whatif-reset').addEventListener('click', (event) => {
      event.preventDefault();
      this.resetPanel();
    });
  }

  private applyModifiableFlags(): void {
    if (!this.model) return;
    const modifiable = new Set(
      this.model.covariates.filter((c) => c.modifiable).map((c) => c.name),
    );
    for (const control of WHATIF_CONTROLS) {
      const input = this.root.getElementById(`whatif-${control.name}`) as
        | HTMLInputElement
        | null;
      if (input && !modifiable.has(control.name)) {
        input.disabled = true;
        input.title = 'marked non-modifiable by the model artifact';
      }
    }
  }

  private onPanelEdit(field: keyof SubjectProfile, value: number | boolean): void {
    (this.panel as Record<string, unknown>)[field] = value;
    this.requestWhatIf();
  }

  resetPanel(): void {
    this.panel = {};
    for (const control of WHATIF_CONTROLS) {
      const input = this.root.getElementById(`whatif-${control.name}`) as
        | HTMLInputElement
        | null;
      if (!input) continue;
      if (control.kind === 'slider') {
        input.value = String(this.profile[control.name]);
        const readout = this.root.getElementById(`whatif-${control.name}-value`);
        if (readout) readout.textContent = input.value;
      } else {
        input.checked = Boolean(this.profile[control.name]);
      }
    }
    void this.whatif();
  }

  private async whatif(): Promise<void> {
    if (validateProfile(this.profile).length > 0) return;
    const modifications = activeModifications(this.profile, this.panel);
    let response;
    try {
      response = await this.client.whatif(this.profile, modifications);
    } catch (error) {
      this.setStatus(error instanceof ServiceError ? error.message : String(error));
      return;
    }
    if (response === null) return;
    this.element('whatif-before').textContent = formatRisk(response.before.total_risk);
    this.element('whatif-after').textContent = formatRisk(response.after.total_risk);
    const deltaNode = this.element('whatif-delta');
    deltaNode.textContent = formatDelta(response.delta);
    deltaNode.className = response.delta < 0 ? 'delta improve' : response.delta > 0 ? 'delta worsen' : 'delta';
  }
}

export function boot(root: Document, locationLike: Pick<Location, 'search' | 'hostname'>): App {
  const client = new ApiClient(resolveBaseUrl(locationLike));
  const app = new App(client, root);
  void app.start();
  return app;
}

declare const window: (Window & typeof globalThis) | undefined;
if (
  typeof window !== 'undefined' &&
  typeof document !== 'undefined' &&
  document.getElementById('profile-form') !== null
) {
  boot(document, window.location);
}
