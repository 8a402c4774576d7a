export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function formatAttrs(attrs: Record<string, number | string>): string {
  return Object.keys(attrs)
    .sort()
    .map((key) => `${key}=${attrs[key]}`)
    .join(" ");
}

/** "send" for built-in kinds, "kind:4242" for user-defined codes. */
export function eventKindLabel(event: { kind?: string; kind_code?: number }): string {
  if (event.kind !== undefined) {
    return event.kind;
  }
  return `kind:${event.kind_code}`;
}
