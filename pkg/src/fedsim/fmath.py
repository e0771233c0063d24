"""Portable binary64 exponential.

Worker processes written in other languages must reproduce training runs
bit-for-bit, and platform ``libm``/``Math.exp`` implementations differ in the
last ulp.  This module therefore carries its own ``exp``: a transliteration of
the classic fdlibm ``e_exp.c`` algorithm (Sun Microsystems, freely
redistributable), which is fully determined by IEEE-754 double arithmetic and
hence gives identical bits on every conforming runtime.  Accuracy is better
than 1 ulp over the full domain (checked against mpmath in the test suite).

The companion implementation lives in ``worker-ts/src/fexp.ts``; the two are
kept in lockstep via the ``fixtures/exp_vectors.json`` golden vectors.
"""

from __future__ import annotations

import math
import struct


def _from_bits(hi: int, lo: int = 0) -> float:
    return struct.unpack(">d", struct.pack(">Q", (hi << 32) | lo))[0]


_HUGE = 1.0e300
_TWOM1000 = _from_bits(0x01700000)  # 2**-1000
_O_THRESHOLD = _from_bits(0x40862E42, 0xFEFA39EF)  # 709.78271289338397
_U_THRESHOLD = _from_bits(0xC0874910, 0xD52D3051)  # -745.13321910194111
_LN2_HI = _from_bits(0x3FE62E42, 0xFEE00000)
_LN2_LO = _from_bits(0x3DEA39EF, 0x35793C76)
_INV_LN2 = _from_bits(0x3FF71547, 0x652B82FE)
_P1 = _from_bits(0x3FC55555, 0x5555553E)
_P2 = _from_bits(0xBF66C16C, 0x16BEBD93)
_P3 = _from_bits(0x3F11566A, 0xAF25DE2C)
_P4 = _from_bits(0xBEBBBD41, 0xC5D26BF1)
_P5 = _from_bits(0x3E663769, 0x72BEA4D0)

# |x| bounds equivalent to fdlibm's high-word comparisons.
_BOUND_OVER = _from_bits(0x40862E42)  # hx >= 0x40862E42
_BOUND_REDUCE = _from_bits(0x3FD62E43)  # hx >  0x3fd62e42 (> 0.5*ln2)
_BOUND_ONE_LN2 = _from_bits(0x3FF0A2B2)  # hx <  0x3FF0A2B2 (< 1.5*ln2)
_BOUND_TINY = _from_bits(0x3E300000)  # hx <  0x3e300000 (< 2**-28)


def exp(x: float) -> float:
    """e**x, rounded per the fdlibm algorithm (deterministic across platforms)."""
    if x != x:  # NaN
        return x
    sign = 1 if x < 0.0 else 0
    ax = -x if sign else x

    if ax >= _BOUND_OVER:
        if ax == math.inf:
            return 0.0 if sign else x
        if x > _O_THRESHOLD:
            return _HUGE * _HUGE  # overflow to +inf
        if x < _U_THRESHOLD:
            return _TWOM1000 * _TWOM1000  # underflow to 0

    hi = lo = 0.0
    if ax >= _BOUND_REDUCE:  # |x| > 0.5*ln2: reduce to x = k*ln2 + r
        if ax < _BOUND_ONE_LN2:
            if sign:
                hi, lo, k = x + _LN2_HI, -_LN2_LO, -1
            else:
                hi, lo, k = x - _LN2_HI, _LN2_LO, 1
        else:
            k = int(_INV_LN2 * x + (-0.5 if sign else 0.5))
            t = float(k)
            hi = x - t * _LN2_HI
            lo = t * _LN2_LO
        x = hi - lo
    elif ax < _BOUND_TINY:  # |x| < 2**-28
        return 1.0 + x
    else:
        k = 0

    # polynomial approximation on the reduced argument
    t = x * x
    c = x - t * (_P1 + t * (_P2 + t * (_P3 + t * (_P4 + t * _P5))))
    if k == 0:
        return 1.0 - ((x * c / (c - 2.0)) - x)
    y = 1.0 - ((lo - (x * c) / (2.0 - c)) - hi)
    # scale by 2**k; power-of-two products are exact, so this matches
    # fdlibm's direct exponent manipulation bit-for-bit
    if k >= -1021:
        if k > 1023:
            return (y * _from_bits(0x7FE00000)) * math.ldexp(1.0, k - 1023)
        return y * math.ldexp(1.0, k)
    return (y * math.ldexp(1.0, k + 1000)) * _TWOM1000
