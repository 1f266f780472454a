/**
 * Thin bindings to the recad CLI.
 *
 * Every entry point shells out to the `recad` executable (override with
 * the RECAD_BIN environment variable) and exchanges plain serializable
 * values: no business logic lives on this side of the boundary. Calls
 * are reentrant — each one works in its own temp directory — so they may
 * run concurrently.
 */

import { execFile } from "node:child_process";
import { mkdtemp, readFile, rm, writeFile } from "node:fs/promises";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { promisify } from "node:util";

const execFileAsync = promisify(execFile);

const RECAD_BIN = process.env.RECAD_BIN ?? "recad";

/** Failure carrying the primary implementation's machine category. */
export class RecadError extends Error {
  constructor(message: string, readonly category: string) {
    super(message);
    this.name = "RecadError";
  }
}

export interface RewardOptions {
  tau?: number;
  lambda1?: number;
  lambda2?: number;
  normalize?: boolean;
  resolution?: number;
  strict?: boolean;
  /** "max_steps,max_loop_iters,max_curves" */
  limits?: string;
}

export interface RewardBreakdown {
  total: number;
  geometric: number;
  format: number;
  failure_category: string | null;
  iou_best: number | null;
  similarity: number | null;
}

export interface EvalOptions {
  resolution?: number;
  samples?: number;
  seed?: number;
  normalize?: boolean;
}

export interface MetricRow {
  valid: boolean;
  chamfer_x1e3?: number;
  iou_best?: number;
  p_f1?: number;
  failure_category?: string;
  alignment?: number[][];
}

export interface CurriculumOptions {
  threshold?: number;
  dedupResolution?: number;
}

export interface CurriculumEntry {
  id: string;
  level: "L" | "F" | "S" | "SE" | "MSE";
  curve_count: number;
  source: string;
  model: unknown;
  hardness?: boolean;
  guidance?: string[];
}

async function runCli(args: string[]): Promise<string> {
  try {
    const { stdout } = await execFileAsync(RECAD_BIN, args, {
      maxBuffer: 256 * 1024 * 1024,
    });
    return stdout;
  } catch (err) {
    const e = err as { stderr?: string; message?: string };
    const lastLine = (e.stderr ?? "").trim().split("\n").pop() ?? "";
    try {
      const parsed = JSON.parse(lastLine) as { error?: string; message?: string };
      throw new RecadError(parsed.message ?? lastLine, parsed.error ?? "error");
    } catch (inner) {
      if (inner instanceof RecadError) throw inner;
      throw new RecadError(e.message ?? "recad CLI failed", "cli");
    }
  }
}

async function withTempDir<T>(fn: (dir: string) => Promise<T>): Promise<T> {
  const dir = await mkdtemp(join(tmpdir(), "recad-bind-"));
  try {
    return await fn(dir);
  } finally {
    await rm(dir, { recursive: true, force: true });
  }
}

function asText(doc: string | object): string {
  return typeof doc === "string" ? doc : JSON.stringify(doc);
}

function rewardFlags(opts: RewardOptions): string[] {
  const flags: string[] = [];
  if (opts.tau !== undefined) flags.push("--tau", String(opts.tau));
  if (opts.lambda1 !== undefined) flags.push("--lambda1", String(opts.lambda1));
  if (opts.lambda2 !== undefined) flags.push("--lambda2", String(opts.lambda2));
  if (opts.normalize === false) flags.push("--no-normalize");
  if (opts.resolution !== undefined) flags.push("--resolution", String(opts.resolution));
  if (opts.strict) flags.push("--strict");
  if (opts.limits) flags.push("--limits", opts.limits);
  return flags;
}

/** Score one solution text against a ground-truth model document. */
export async function computeReward(
  solutionText: string,
  gtModel: string | object,
  opts: RewardOptions = {},
): Promise<RewardBreakdown> {
  return withTempDir(async (dir) => {
    const sol = join(dir, "solution.txt");
    const gt = join(dir, "gt.json");
    await writeFile(sol, solutionText, "utf-8");
    await writeFile(gt, asText(gtModel), "utf-8");
    const out = await runCli(["reward", sol, gt, ...rewardFlags(opts)]);
    return JSON.parse(out.trim()) as RewardBreakdown;
  });
}

/** Full metric row (chamfer / IoU-best / P-F1) for one model pair. */
export async function evalPair(
  predModel: string | object,
  gtModel: string | object,
  opts: EvalOptions = {},
): Promise<MetricRow> {
  return withTempDir(async (dir) => {
    const pred = join(dir, "pred.json");
    const gt = join(dir, "gt.json");
    const rows = join(dir, "rows.jsonl");
    await writeFile(pred, asText(predModel), "utf-8");
    await writeFile(gt, asText(gtModel), "utf-8");
    const flags: string[] = [];
    if (opts.resolution !== undefined) flags.push("--resolution", String(opts.resolution));
    if (opts.samples !== undefined) flags.push("--samples", String(opts.samples));
    if (opts.seed !== undefined) flags.push("--seed", String(opts.seed));
    if (opts.normalize === false) flags.push("--no-normalize");
    await runCli(["eval", pred, gt, "-o", rows, ...flags]);
    const first = (await readFile(rows, "utf-8")).trim().split("\n")[0];
    const { stem: _stem, ...row } = JSON.parse(first) as MetricRow & { stem: string };
    return row;
  });
}

/** Execute a script in the sandbox and return its native model document. */
export async function executeScript(
  scriptText: string,
  limits?: string,
): Promise<unknown> {
  return withTempDir(async (dir) => {
    const src = join(dir, "model.rcad");
    const out = join(dir, "model.json");
    await writeFile(src, scriptText, "utf-8");
    const flags = limits ? ["--limits", limits] : [];
    await runCli(["convert", src, out, ...flags]);
    return JSON.parse(await readFile(out, "utf-8"));
  });
}

/** Build the ordered, deduplicated primitive curriculum of a model dir. */
export async function buildCurriculum(
  modelsDir: string,
  opts: CurriculumOptions = {},
): Promise<CurriculumEntry[]> {
  return withTempDir(async (dir) => {
    const manifest = join(dir, "manifest.jsonl");
    const flags: string[] = [];
    if (opts.threshold !== undefined) flags.push("--threshold", String(opts.threshold));
    if (opts.dedupResolution !== undefined)
      flags.push("--dedup-resolution", String(opts.dedupResolution));
    await runCli(["curriculum", modelsDir, "-o", manifest, ...flags]);
    const text = await readFile(manifest, "utf-8");
    return text
      .trim()
      .split("\n")
      .filter((line) => line.length > 0)
      .map((line) => JSON.parse(line) as CurriculumEntry);
  });
}
