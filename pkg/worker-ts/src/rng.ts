/**
 * xoshiro256** with splitmix64 seeding, matching the coordinator's streams
 * bit-for-bit (golden vectors: fixtures/rng_stream.json).
 *
 * BigInt carries the 64-bit integer state; uniforms take the top 53 bits,
 * (u64 >> 11) * 2**-53, which converts to a double exactly.
 */

const M64 = (1n << 64n) - 1n;
const DOUBLE_SCALE = 2 ** -53;

export class SplitMix64 {
  private state: bigint;

  constructor(seed: bigint) {
    this.state = seed & M64;
  }

  nextU64(): bigint {
    this.state = (this.state + 0x9e3779b97f4a7c15n) & M64;
    let z = this.state;
    z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & M64;
    z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & M64;
    return z ^ (z >> 31n);
  }
}

function rotl(x: bigint, k: bigint): bigint {
  return ((x << k) | (x >> (64n - k))) & M64;
}

export class Xoshiro256StarStar {
  private s: bigint[];

  constructor(seed: bigint) {
    const sm = new SplitMix64(seed);
    this.s = [sm.nextU64(), sm.nextU64(), sm.nextU64(), sm.nextU64()];
  }

  static fromState(state: [bigint, bigint, bigint, bigint]): Xoshiro256StarStar {
    const rng = Object.create(Xoshiro256StarStar.prototype) as Xoshiro256StarStar;
    rng.s = state.map((w) => w & M64);
    return rng;
  }

  nextU64(): bigint {
    const s = this.s;
    const result = (rotl((s[1] * 5n) & M64, 7n) * 9n) & M64;
    const t = (s[1] << 17n) & M64;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45n);
    return result;
  }

  /** Uniform double in [0, 1). */
  uniform(): number {
    return Number(this.nextU64() >> 11n) * DOUBLE_SCALE;
  }
}
