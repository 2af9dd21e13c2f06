"""Compiled hot loops for the swap chains and the stub matcher.

The chain state lives in three arrays: ``ea``/``eb`` hold the endpoints of
the M edge positions (normalized ``ea[p] <= eb[p]``) and ``W`` is the dense
symmetric multiplicity matrix.  The RNG is the same xoshiro256** as
:mod:`nullnet.rng`, operating in place on the shared uint64 state array
with an identical draw order, so a chain advanced here and one advanced by
the pure-Python step functions produce bit-identical trajectories.

Algorithm ids: 0 chain over stub-labeled spaces (accept unless the swap
leaves the space), 1 vertex-labeled with per-case acceptance weights,
2 vertex-labeled Metropolis-Hastings on forward/reverse swap counts,
3 naive unweighted walk (negative control; mechanically identical to 0).
"""

from __future__ import annotations

import numpy as np
from numba import njit

u64 = np.uint64

_U5 = u64(5)
_U7 = u64(7)
_U9 = u64(9)
_U11 = u64(11)
_U17 = u64(17)
_U45 = u64(45)
_U57 = u64(57)
_U19 = u64(19)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53

ALG_STUB = 0
ALG_VERTEX_BASIC = 1
ALG_VERTEX_MH = 2
ALG_NAIVE = 3


@njit(cache=True, nogil=True, inline="always")
def _next_u64(state):
    s0 = state[0]
    s1 = state[1]
    s2 = state[2]
    s3 = state[3]
    x = s1 * _U5
    result = ((x << _U7) | (x >> _U57)) * _U9
    t = s1 << _U17
    s2 = s2 ^ s0
    s3 = s3 ^ s1
    s1 = s1 ^ s2
    s0 = s0 ^ s3
    s2 = s2 ^ t
    s3 = (s3 << _U45) | (s3 >> _U19)
    state[0] = s0
    state[1] = s1
    state[2] = s2
    state[3] = s3
    return result


@njit(cache=True, nogil=True, inline="always")
def _mask_for(n):
    # smallest all-ones mask covering n-1 (n >= 1)
    m = u64(n - 1)
    mask = u64(0)
    while mask < m:
        mask = (mask << u64(1)) | u64(1)
    return mask


@njit(cache=True, nogil=True, inline="always")
def _randbelow(state, n, mask):
    while True:
        x = _next_u64(state) & mask
        if x < u64(n):
            return np.int64(x)


@njit(cache=True, nogil=True, inline="always")
def _uniform53(state):
    return (_next_u64(state) >> _U11) * _INV53


@njit(cache=True, nogil=True, inline="always")
def _winc(W, x, y, d):
    W[x, y] += d
    if x != y:
        W[y, x] += d


@njit(cache=True, nogil=True, inline="always")
def _double_step(ea, eb, W, state, M, alg, loops_ok, multi_ok, mask_m, mask_m1):
    i = _randbelow(state, M, mask_m)
    j = _randbelow(state, M - 1, mask_m1)
    if j >= i:
        j += 1
    d = _randbelow(state, 2, u64(1))

    a = ea[i]
    b = eb[i]
    c = ea[j]
    e = eb[j]
    if d == 1:
        c, e = e, c

    # proposal pairs: (a,c) and (b,e), normalized
    if a <= c:
        n1a, n1b = a, c
    else:
        n1a, n1b = c, a
    if b <= e:
        n2a, n2b = b, e
    else:
        n2a, n2b = e, b

    o1a = a
    o1b = b
    o2a = ea[j]
    o2b = eb[j]

    # no-op: proposal multiset equals the chosen pair of edges
    if (n1a == o1a and n1b == o1b and n2a == o2a and n2b == o2b) or (
        n1a == o2a and n1b == o2b and n2a == o1a and n2b == o1b
    ):
        return

    # feasibility in the target space
    if n1a == n1b or n2a == n2b:
        if not loops_ok:
            return
    if not multi_ok:
        if n1a == n2a and n1b == n2b:
            if n1a != n1b:
                return  # adds two copies of the same non-loop pair
        else:
            if n1a != n1b and W[n1a, n1b] >= 1:
                return
            if n2a != n2b and W[n2a, n2b] >= 1:
                return

    if alg == 1:
        w1 = W[o1a, o1b]
        w2 = W[o2a, o2b]
        loop_chosen = (o1a == o1b) or (o2a == o2b)
        if o1a == o2a and o1b == o2b:
            p = 2.0 / (w1 * (w1 - 1.0))
        else:
            p = 1.0 / (w1 * w2)
        if loop_chosen:
            p *= 0.5
        if _uniform53(state) >= p:
            return
    elif alg == 2:
        loop1 = o1a == o1b
        loop2 = o2a == o2b
        w1 = W[o1a, o1b]
        w2 = W[o2a, o2b]
        if loop1 and loop2:
            # two self-loops -> double edge
            wn = W[n1a, n1b]
            to = 2.0 * w1 * w2
            fr = 0.5 * (wn + 2.0) * (wn + 1.0)
        elif o1a == o2a and o1b == o2b:
            # copies of one multiedge -> two self-loops
            to = 0.5 * w1 * (w1 - 1.0)
            fr = 2.0 * (W[n1a, n1b] + 1.0) * (W[n2a, n2b] + 1.0)
        elif loop1 or loop2:
            # self-loop plus edge on three vertices
            to = 2.0 * w1 * w2
            fr = (W[n1a, n1b] + 1.0) * (W[n2a, n2b] + 1.0)
        else:
            # shared-vertex pair creating a loop, or four distinct vertices
            creates_loop = (n1a == n1b) or (n2a == n2b)
            to = 1.0 * w1 * w2
            fr = (W[n1a, n1b] + 1.0) * (W[n2a, n2b] + 1.0)
            if creates_loop:
                fr *= 2.0
        if _uniform53(state) >= fr / to:
            return

    # apply
    _winc(W, o1a, o1b, -1)
    _winc(W, o2a, o2b, -1)
    _winc(W, n1a, n1b, 1)
    _winc(W, n2a, n2b, 1)
    ea[i] = n1a
    eb[i] = n1b
    ea[j] = n2a
    eb[j] = n2b


@njit(cache=True, nogil=True, inline="always")
def _triangle_step(ea, eb, W, state, M, alg, mask_m, mask_m1, mask_m2):
    i = _randbelow(state, M, mask_m)
    j = _randbelow(state, M - 1, mask_m1)
    if j >= i:
        j += 1
    k = _randbelow(state, M - 2, mask_m2)
    lo = i if i < j else j
    hi = j if i < j else i
    if k >= lo:
        k += 1
    if k >= hi:
        k += 1

    a1 = ea[i]
    b1 = eb[i]
    a2 = ea[j]
    b2 = eb[j]
    a3 = ea[k]
    b3 = eb[k]
    nloops = 0
    if a1 == b1:
        nloops += 1
    if a2 == b2:
        nloops += 1
    if a3 == b3:
        nloops += 1

    # canonical slots: positions ascending, vertices ascending
    p0 = min(i, min(j, k))
    p2 = max(i, max(j, k))
    p1 = (i + j + k) - p0 - p2

    if nloops == 3:
        if a1 == a2 or a1 == a3 or a2 == a3:
            return
        s0 = min(a1, min(a2, a3))
        s2 = max(a1, max(a2, a3))
        s1 = (a1 + a2 + a3) - s0 - s2
        if W[s0, s1] != 0 or W[s1, s2] != 0 or W[s0, s2] != 0:
            return  # would create a multiedge
        if alg == 1 or alg == 2:
            p = 1.0 / (W[s0, s0] * W[s1, s1] * W[s2, s2])
        else:
            p = 1.0
        if _uniform53(state) >= p:
            return
        _winc(W, s0, s0, -1)
        _winc(W, s1, s1, -1)
        _winc(W, s2, s2, -1)
        _winc(W, s0, s1, 1)
        _winc(W, s1, s2, 1)
        _winc(W, s0, s2, 1)
        ea[p0] = s0
        eb[p0] = s1
        ea[p1] = s1
        eb[p1] = s2
        ea[p2] = s0
        eb[p2] = s2
    elif nloops == 0:
        # a triangle is three distinct pairwise-joined pairs on 3 vertices
        s0 = a1
        s1 = b1
        s2 = np.int64(-1)
        ok = True
        for t in (a2, b2, a3, b3):
            if t != s0 and t != s1:
                if s2 == -1:
                    s2 = t
                elif t != s2:
                    ok = False
        if not ok or s2 == -1:
            return
        if (a2 == a3 and b2 == b3) or (a2 == a1 and b2 == b1) or (a3 == a1 and b3 == b1):
            return
        lo_v = min(s0, min(s1, s2))
        hi_v = max(s0, max(s1, s2))
        s1 = (s0 + s1 + s2) - lo_v - hi_v
        s0 = lo_v
        s2 = hi_v
        if alg == 1 or alg == 2:
            p = 1.0  # reverse count (w_ii + 1) product is always >= 1
        elif alg == 0:
            p = 0.125
        else:
            p = 1.0
        if _uniform53(state) >= p:
            return
        _winc(W, s0, s1, -1)
        _winc(W, s1, s2, -1)
        _winc(W, s0, s2, -1)
        _winc(W, s0, s0, 1)
        _winc(W, s1, s1, 1)
        _winc(W, s2, s2, 1)
        ea[p0] = s0
        eb[p0] = s0
        ea[p1] = s1
        eb[p1] = s1
        ea[p2] = s2
        eb[p2] = s2
    # any other composition: hold


@njit(cache=True, nogil=True)
def advance(ea, eb, W, state, nsteps, alg, loops_ok, multi_ok, tri_prob):
    """Run nsteps chain attempts in place (rejections count as steps)."""
    M = ea.shape[0]
    if M < 2:
        return
    mask_m = _mask_for(M)
    mask_m1 = _mask_for(M - 1)
    mask_m2 = _mask_for(M - 2) if M >= 3 else u64(0)
    for _ in range(nsteps):
        if tri_prob > 0.0 and _uniform53(state) < tri_prob:
            if M >= 3:
                _triangle_step(ea, eb, W, state, M, alg, mask_m, mask_m1, mask_m2)
            continue
        _double_step(ea, eb, W, state, M, alg, loops_ok, multi_ok, mask_m, mask_m1)


@njit(cache=True, nogil=True, inline="always")
def _pack_key(ea, eb, n, scratch):
    """Sorted-edge-multiset key packed into one int64 (small graphs only)."""
    M = ea.shape[0]
    for t in range(M):
        scratch[t] = ea[t] * n + eb[t]
    for t in range(1, M):  # insertion sort
        v = scratch[t]
        s = t - 1
        while s >= 0 and scratch[s] > v:
            scratch[s + 1] = scratch[s]
            s -= 1
        scratch[s + 1] = v
    base = np.int64(n) * np.int64(n)
    key = np.int64(0)
    for t in range(M):
        key = key * base + scratch[t]
    return key


@njit(cache=True, nogil=True)
def advance_collect_keys(
    ea, eb, W, state, alg, loops_ok, multi_ok, tri_prob, burn, spacing, out, n
):
    """Burn in, then record a packed graph key every ``spacing`` steps."""
    advance(ea, eb, W, state, burn, alg, loops_ok, multi_ok, tri_prob)
    scratch = np.empty(ea.shape[0], dtype=np.int64)
    for s in range(out.shape[0]):
        advance(ea, eb, W, state, spacing, alg, loops_ok, multi_ok, tri_prob)
        out[s] = _pack_key(ea, eb, n, scratch)


@njit(cache=True, nogil=True)
def stub_match_keys(degrees, state, out):
    """Packed keys of repeated stub matchings of one degree sequence."""
    n = degrees.shape[0]
    m = np.int64(0)
    for v in range(n):
        m += degrees[v]
    stubs = np.empty(m, dtype=np.int64)
    work = np.empty(m, dtype=np.int64)
    pos = 0
    for v in range(n):
        for _ in range(degrees[v]):
            stubs[pos] = v
            pos += 1
    half = m // 2
    ea = np.empty(half, dtype=np.int64)
    eb = np.empty(half, dtype=np.int64)
    scratch = np.empty(half, dtype=np.int64)
    for s in range(out.shape[0]):
        for t in range(m):
            work[t] = stubs[t]
        for t in range(m - 1, 0, -1):  # Fisher-Yates
            j = _randbelow(state, t + 1, _mask_for(t + 1))
            tmp = work[t]
            work[t] = work[j]
            work[j] = tmp
        for t in range(half):
            x = work[2 * t]
            y = work[2 * t + 1]
            if x <= y:
                ea[t] = x
                eb[t] = y
            else:
                ea[t] = y
                eb[t] = x
        out[s] = _pack_key(ea, eb, n, scratch)
