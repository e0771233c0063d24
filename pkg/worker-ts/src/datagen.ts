/**
 * Local training data: (x, y) uniform on [0,1)^2, targets
 * (sqrt(x*y), sqrt(sqrt(x*y))). Two RNG draws per sample, x first.
 * Math.sqrt is the IEEE correctly-rounded square root, so these bits match
 * the coordinator; pow() would not.
 */

import { Sample } from "./ann";
import { Xoshiro256StarStar } from "./rng";

export function genSample(rng: Xoshiro256StarStar): Sample {
  const x = rng.uniform();
  const y = rng.uniform();
  const z = x * y;
  const t1 = Math.sqrt(z);
  const t2 = Math.sqrt(t1);
  return { input: [x, y], target: [t1, t2] };
}

export function genBatch(rng: Xoshiro256StarStar, n: number): Sample[] {
  const out: Sample[] = [];
  for (let i = 0; i < n; i++) out.push(genSample(rng));
  return out;
}
