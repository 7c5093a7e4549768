import { AnnotatorApp } from "./app.js";

function requireElement<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el as T;
}

const app = new AnnotatorApp({
  recordingList: requireElement<HTMLSelectElement>("recording-list"),
  status: requireElement<HTMLElement>("status"),
  spanPanel: requireElement<HTMLElement>("span-panel"),
  saveButton: requireElement<HTMLButtonElement>("save"),
  reloadButton: requireElement<HTMLButtonElement>("reload"),
  retryButton: requireElement<HTMLButtonElement>("retry"),
  canvas: requireElement<HTMLCanvasElement>("trace-canvas"),
});

void app.start();
