import { readFileSync } from "node:fs";
import { join, resolve } from "node:path";

// Anchored on the package root (vitest runs from frontend/) rather than
// import.meta.url, which is an http: URL inside the jsdom environment.
const packageRoot = process.cwd();

/** Workspace the global setup stages with the Python CLI. */
export const WORK_DIR = join(packageRoot, "tests", ".work");
export const BUNDLE_DIR = join(WORK_DIR, "bundle");

/** Python-side fixtures the pipeline ingests. */
export const PY_FIXTURES = resolve(packageRoot, "..", "tests", "fixtures");

export function readBundleJson<T>(relative: string): T {
  return JSON.parse(readFileSync(join(BUNDLE_DIR, relative), "utf-8")) as T;
}
