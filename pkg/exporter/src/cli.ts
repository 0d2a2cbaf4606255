/**
 * Command line: convert segment record files to drivebc JSONL.
 *
 *   ts-node src/cli.ts --out DIR [--views front,side_left]
 *                      [--extractor hash-projection-v1] [--max-segments N]
 *                      record1.tfrecord [record2.tfrecord ...]
 *
 * Writes one <segment_id>.jsonl per segment plus manifest.json. Corrupt
 * records are skipped with a warning and counted in the manifest; a schema
 * mismatch aborts the run.
 */

import * as fs from "fs";
import * as path from "path";

import { ConvertStats, convertRecordFile } from "./convert";
import { DEFAULT_EXTRACTOR_ID, getExtractor } from "./embeddings";

export interface ExportConfig {
  inputs: string[];
  outDir: string;
  views: string[];
  extractorId: string;
  maxSegments?: number;
}

export interface ExportSummary {
  segments: { segment_id: string; frames: number; file: string }[];
  skipped_records: number;
  embedding_dim: number | null;
  extractor: string | null;
  views: string[];
}

function sanitizeFileName(segmentId: string): string {
  return segmentId.replace(/[^A-Za-z0-9._-]/g, "_") + ".jsonl";
}

export function runExport(cfg: ExportConfig,
                          log: (msg: string) => void = console.error): ExportSummary {
  if (cfg.inputs.length === 0) {
    throw new Error("no input record files given");
  }
  for (const input of cfg.inputs) {
    if (!fs.existsSync(input)) {
      throw new Error(`input record file not found: ${input}`);
    }
  }
  const extractor = cfg.views.length > 0 ? getExtractor(cfg.extractorId) : null;
  fs.mkdirSync(cfg.outDir, { recursive: true });

  const summary: ExportSummary = {
    segments: [],
    skipped_records: 0,
    embedding_dim: extractor ? extractor.dim : null,
    extractor: extractor ? extractor.id : null,
    views: [...cfg.views],
  };
  for (const input of cfg.inputs) {
    if (cfg.maxSegments !== undefined
        && summary.segments.length >= cfg.maxSegments) {
      break;
    }
    const buffer = new Uint8Array(fs.readFileSync(input));
    const stats: ConvertStats = convertRecordFile(buffer, {
      views: cfg.views,
      extractorId: cfg.extractorId,
    });
    for (const warning of stats.warnings) log(`warning: ${input}: ${warning}`);
    summary.skipped_records += stats.skippedRecords;
    for (const segment of stats.segments) {
      if (cfg.maxSegments !== undefined
          && summary.segments.length >= cfg.maxSegments) {
        break;
      }
      const fileName = sanitizeFileName(segment.segmentId);
      fs.writeFileSync(path.join(cfg.outDir, fileName), segment.jsonl);
      summary.segments.push({
        segment_id: segment.segmentId,
        frames: segment.frames,
        file: fileName,
      });
    }
  }
  fs.writeFileSync(path.join(cfg.outDir, "manifest.json"),
                   JSON.stringify(summary, null, 2) + "\n");
  return summary;
}

function parseArgs(argv: string[]): ExportConfig {
  const cfg: ExportConfig = {
    inputs: [],
    outDir: "",
    views: [],
    extractorId: DEFAULT_EXTRACTOR_ID,
  };
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg === "--out") cfg.outDir = argv[++i];
    else if (arg === "--views") {
      cfg.views = argv[++i].split(",").map((v) => v.trim()).filter(Boolean);
    } else if (arg === "--extractor") cfg.extractorId = argv[++i];
    else if (arg === "--max-segments") cfg.maxSegments = Number(argv[++i]);
    else if (arg === "--help" || arg === "-h") {
      console.log("usage: cli.ts --out DIR [--views v1,v2] [--extractor ID] "
        + "[--max-segments N] records...");
      process.exit(0);
    } else if (arg.startsWith("--")) {
      throw new Error(`unknown flag: ${arg}`);
    } else cfg.inputs.push(arg);
  }
  if (!cfg.outDir) throw new Error("--out is required");
  return cfg;
}

if (require.main === module) {
  try {
    const summary = runExport(parseArgs(process.argv.slice(2)));
    console.log(`exported ${summary.segments.length} segment(s), `
      + `skipped ${summary.skipped_records} record(s)`);
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    process.exit(1);
  }
}
