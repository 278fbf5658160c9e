import type { Question } from "./types.js";

const escapeHtml = (s: string) =>
  s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");

const escapeRegExp = (s: string) => s.replace(/[.*+?^${}()|[\]\\]/g, "\\$&");

/** Words of the question's argument mentions, for context highlighting. */
export function mentionTerms(q: Question): string[] {
  const p = q.payload as Record<string, unknown>;
  const terms: string[] = [];
  for (const field of ["sound", "source", "scene", "phrase"]) {
    const v = p[field];
    if (typeof v === "string" && v.trim()) terms.push(...v.split(/\s+/));
  }
  return [...new Set(terms)];
}

/** Context sentence as HTML with mention tokens wrapped in <mark>. */
export function highlightContext(q: Question): string {
  if (!q.context) return "";
  let html = escapeHtml(q.context);
  for (const term of mentionTerms(q)) {
    const re = new RegExp(`\\b(${escapeRegExp(escapeHtml(term))})\\b`, "gi");
    html = html.replace(re, "<mark>$1</mark>");
  }
  return html;
}
