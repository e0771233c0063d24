/**
 * Portable binary64 exponential.
 *
 * Transliteration of the classic fdlibm e_exp algorithm, which is fully
 * determined by IEEE-754 double arithmetic: it returns the same bits here as
 * the coordinator's implementation does, which Math.exp would not (platform
 * libm implementations differ in the last ulp). Pinned cross-language by
 * fixtures/exp_vectors.json.
 */

const scratch = new ArrayBuffer(8);
const scratchF64 = new Float64Array(scratch);
const scratchU64 = new BigUint64Array(scratch);

function fromBits(hi: number, lo = 0): number {
  scratchU64[0] = (BigInt(hi) << 32n) | BigInt(lo);
  return scratchF64[0];
}

/** Exact 2**k for -1022 <= k <= 1023 via direct exponent-field construction. */
function pow2(k: number): number {
  scratchU64[0] = BigInt(k + 1023) << 52n;
  return scratchF64[0];
}

const HUGE = 1.0e300;
const TWOM1000 = fromBits(0x01700000); // 2**-1000
const O_THRESHOLD = fromBits(0x40862e42, 0xfefa39ef); // 709.78271289338397
const U_THRESHOLD = fromBits(0xc0874910, 0xd52d3051); // -745.13321910194111
const LN2_HI = fromBits(0x3fe62e42, 0xfee00000);
const LN2_LO = fromBits(0x3dea39ef, 0x35793c76);
const INV_LN2 = fromBits(0x3ff71547, 0x652b82fe);
const P1 = fromBits(0x3fc55555, 0x5555553e);
const P2 = fromBits(0xbf66c16c, 0x16bebd93);
const P3 = fromBits(0x3f11566a, 0xaf25de2c);
const P4 = fromBits(0xbebbbd41, 0xc5d26bf1);
const P5 = fromBits(0x3e663769, 0x72bea4d0);

// |x| bounds equivalent to fdlibm's high-word comparisons
const BOUND_OVER = fromBits(0x40862e42);
const BOUND_REDUCE = fromBits(0x3fd62e43); // > 0.5*ln2
const BOUND_ONE_LN2 = fromBits(0x3ff0a2b2); // < 1.5*ln2
const BOUND_TINY = fromBits(0x3e300000); // < 2**-28

/** e**x with fdlibm rounding, deterministic across platforms. */
export function exp(x: number): number {
  if (x !== x) return x; // NaN
  const sign = x < 0.0;
  const ax = sign ? -x : x;

  if (ax >= BOUND_OVER) {
    if (ax === Infinity) return sign ? 0.0 : x;
    if (x > O_THRESHOLD) return HUGE * HUGE;
    if (x < U_THRESHOLD) return TWOM1000 * TWOM1000;
  }

  let hi = 0.0;
  let lo = 0.0;
  let k: number;
  if (ax >= BOUND_REDUCE) {
    if (ax < BOUND_ONE_LN2) {
      if (sign) {
        hi = x + LN2_HI;
        lo = -LN2_LO;
        k = -1;
      } else {
        hi = x - LN2_HI;
        lo = LN2_LO;
        k = 1;
      }
    } else {
      k = Math.trunc(INV_LN2 * x + (sign ? -0.5 : 0.5));
      const t = k;
      hi = x - t * LN2_HI;
      lo = t * LN2_LO;
    }
    x = hi - lo;
  } else if (ax < BOUND_TINY) {
    return 1.0 + x;
  } else {
    k = 0;
  }

  const t = x * x;
  const c = x - t * (P1 + t * (P2 + t * (P3 + t * (P4 + t * P5))));
  if (k === 0) {
    return 1.0 - ((x * c) / (c - 2.0) - x);
  }
  const y = 1.0 - ((lo - (x * c) / (2.0 - c)) - hi);
  if (k >= -1021) {
    if (k > 1023) return y * fromBits(0x7fe00000) * pow2(k - 1023);
    return y * pow2(k);
  }
  return y * pow2(k + 1000) * TWOM1000;
}
