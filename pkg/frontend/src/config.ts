/** Runtime configuration and the credential session shared across views. */

export interface Session {
  token: string | null;
}

let apiBase = "";

export function setApiBase(base: string): void {
  apiBase = base.replace(/\/$/, "");
}

export function getApiBase(): string {
  return apiBase;
}

const TOKEN_KEY = "espindata.token";

export function loadSession(): Session {
  try {
    return { token: globalThis.localStorage?.getItem(TOKEN_KEY) ?? null };
  } catch {
    return { token: null };
  }
}

export function saveToken(token: string | null): void {
  try {
    if (token) {
      globalThis.localStorage?.setItem(TOKEN_KEY, token);
    } else {
      globalThis.localStorage?.removeItem(TOKEN_KEY);
    }
  } catch {
    /* storage unavailable (tests) */
  }
}
