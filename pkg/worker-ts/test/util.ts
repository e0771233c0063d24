import * as fs from "fs";
import * as path from "path";

/** Locate the repo-level fixtures/ directory from any working directory. */
export function fixturesDir(): string {
  let dir = process.cwd();
  for (let i = 0; i < 6; i++) {
    const candidate = path.join(dir, "fixtures");
    if (fs.existsSync(path.join(candidate, "manifest.json"))) return candidate;
    dir = path.dirname(dir);
  }
  throw new Error("fixtures directory not found; run from the repository");
}

export function readFixture(name: string): Buffer {
  return fs.readFileSync(path.join(fixturesDir(), name));
}

export function readJsonFixture<T>(name: string): T {
  return JSON.parse(fs.readFileSync(path.join(fixturesDir(), name), "utf8")) as T;
}

const scratch = Buffer.alloc(8);

/** Little-endian binary64 hex image of a double. */
export function f64Hex(x: number): string {
  scratch.writeDoubleLE(x, 0);
  return scratch.toString("hex");
}

export function f64FromHex(hex: string): number {
  return Buffer.from(hex, "hex").readDoubleLE(0);
}
