// Observer configuration: API base URL and token, persisted in localStorage.

export interface ObserverConfig {
  baseUrl: string;
  token: string;
  pollIntervalMs: number;
}

const DEFAULTS: ObserverConfig = {
  baseUrl: 'http://127.0.0.1:8732',
  token: '',
  pollIntervalMs: 5000,
};

export function loadConfig(): ObserverConfig {
  try {
    const raw = localStorage.getItem('agentlab-observer-config');
    if (raw) {
      return { ...DEFAULTS, ...JSON.parse(raw) };
    }
  } catch {
    // fall through to defaults
  }
  return { ...DEFAULTS };
}

export function saveConfig(config: ObserverConfig): void {
  localStorage.setItem('agentlab-observer-config', JSON.stringify(config));
}
