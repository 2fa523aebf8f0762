# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: trie scan, bad-pair dictionary probes, long-word pass.

Keys arrive as (n, L) uint64 arrays, most significant limb first.  Packed
words are (.., Lw) uint64 arrays, least significant limb first.  Operation
counts mirror the pure-Python paths exactly.
"""

from libc.stdint cimport uint64_t, int64_t, int32_t
from libc.stdlib cimport malloc, free

import numpy as np

cdef enum:
    MAXLW = 80


cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


cdef inline int key_cmp(const uint64_t* x, const uint64_t* y, int L) noexcept nogil:
    cdef int t
    for t in range(L):
        if x[t] != y[t]:
            return -1 if x[t] < y[t] else 1
    return 0


cdef inline bint key_eq(const uint64_t* x, const uint64_t* y, int L) noexcept nogil:
    cdef int t
    for t in range(L):
        if x[t] != y[t]:
            return False
    return True


cdef inline bint key_zero(const uint64_t* x, int L) noexcept nogil:
    cdef int t
    for t in range(L):
        if x[t]:
            return False
    return True


# -- trie ---------------------------------------------------------------------

def trie_solve(const uint64_t[:, ::1] keys, const int64_t[::1] left,
               const int64_t[::1] right, const int32_t[::1] lab_limb,
               const uint64_t[::1] lab_bit, int64_t root, bint distinct):
    """Merge each ordered XOR traversal against X; returns (a, b_leaf, j, visits, comparisons).

    The branch test a ^ label > a reduces to "a has a 0 at the label's
    leading bit", given as (limb, mask) per inner node.
    """
    cdef int64_t n = keys.shape[0]
    cdef int L = keys.shape[1]
    cdef int64_t visits = 0, comparisons = 0
    cdef int64_t ai, node, i, j, sp
    cdef int64_t res_a = -1, res_b = -1, res_j = -1
    cdef int64_t* stack = <int64_t*> malloc((n + 2) * sizeof(int64_t))
    cdef uint64_t y[8]
    cdef uint64_t y1
    cdef const uint64_t* a
    cdef const uint64_t* b
    cdef int t, c
    if stack == NULL:
        raise MemoryError()
    try:
        with nogil:
            for ai in range(n):
                a = &keys[ai, 0]
                if distinct and key_zero(a, L):
                    continue
                sp = 1
                stack[0] = root
                j = 0
                while sp:
                    sp -= 1
                    node = stack[sp]
                    visits += 1
                    if node >= n:
                        i = node - n
                        comparisons += 1
                        if a[lab_limb[i]] & lab_bit[i]:
                            stack[sp] = left[i]
                            stack[sp + 1] = right[i]
                        else:
                            stack[sp] = right[i]
                            stack[sp + 1] = left[i]
                        sp += 2
                        continue
                    b = &keys[node, 0]
                    if L == 1:
                        y1 = a[0] ^ b[0]
                        while keys[j, 0] < y1:
                            comparisons += 1
                            j += 1
                            if j == n:
                                break
                        if j == n:
                            break
                        comparisons += 1
                        if keys[j, 0] == y1:
                            if not distinct or (a[0] != b[0] and y1 != a[0] and y1 != b[0]):
                                res_a = ai
                                res_b = node
                                res_j = j
                                break
                        continue
                    for t in range(L):
                        y[t] = a[t] ^ b[t]
                    c = key_cmp(&keys[j, 0], y, L)
                    while c < 0:
                        comparisons += 1
                        j += 1
                        if j == n:
                            break
                        c = key_cmp(&keys[j, 0], y, L)
                    if j == n:
                        break
                    comparisons += 1
                    if c == 0:
                        if not distinct or (not key_eq(a, b, L) and not key_eq(y, a, L)
                                            and not key_eq(y, b, L)):
                            res_a = ai
                            res_b = node
                            res_j = j
                            break
                if res_a >= 0:
                    break
    finally:
        free(stack)
    return res_a, res_b, res_j, visits, comparisons


# -- static dictionary ---------------------------------------------------------

cdef inline int64_t lin_hash(const uint64_t* x, const uint64_t* rows, int m, int L) noexcept nogil:
    cdef int64_t out = 0
    cdef int i, t
    cdef uint64_t acc
    for i in range(m):
        acc = 0
        for t in range(L):
            acc ^= rows[i * L + t] & x[t]
        out |= (<int64_t> (__builtin_popcountll(acc) & 1)) << i
    return out


def pair_probe(const uint64_t[:, ::1] bad, const uint64_t[:, ::1] top_rows,
               const int32_t[::1] bucket_bits, const int64_t[::1] row_off,
               const int64_t[::1] slot_off, const uint64_t[:, ::1] rows2,
               const uint64_t[:, ::1] slot_keys, const unsigned char[::1] slot_used,
               bint distinct):
    """Scan unordered bad pairs i <= j, probing a ^ b; returns (i, j, probes)."""
    cdef int64_t B = bad.shape[0]
    cdef int L = bad.shape[1]
    cdef int mt = top_rows.shape[0]
    cdef int64_t i, j, u, s, probes = 0
    cdef int64_t ri = -1, rj = -1
    cdef uint64_t c[8]
    cdef int t, bits
    cdef const uint64_t* a
    cdef const uint64_t* b
    cdef const uint64_t* tr = &top_rows[0, 0] if mt else NULL
    with nogil:
        for i in range(B):
            a = &bad[i, 0]
            for j in range(i, B):
                b = &bad[j, 0]
                for t in range(L):
                    c[t] = a[t] ^ b[t]
                probes += 1
                u = lin_hash(c, tr, mt, L) if mt else 0
                bits = bucket_bits[u]
                if bits < 0:
                    continue
                s = slot_off[u]
                if bits:
                    s += lin_hash(c, &rows2[row_off[u], 0], bits, L)
                if not slot_used[s] or not key_eq(&slot_keys[s, 0], c, L):
                    continue
                if distinct and (i == j or key_eq(c, a, L) or key_eq(c, b, L)):
                    continue
                ri = i
                rj = j
                break
            if ri >= 0:
                break
    return ri, rj, probes


# -- packed long-word pass --------------------------------------------------------

cdef inline void w_shr(uint64_t* d, const uint64_t* s, int sh, int Lw) noexcept nogil:
    cdef int q = sh >> 6, r = sh & 63, t
    for t in range(Lw):
        if t + q >= Lw:
            d[t] = 0
        elif r == 0:
            d[t] = s[t + q]
        else:
            d[t] = s[t + q] >> r
            if t + q + 1 < Lw:
                d[t] |= s[t + q + 1] << (64 - r)


cdef inline void w_shl(uint64_t* d, const uint64_t* s, int sh, int Lw) noexcept nogil:
    cdef int q = sh >> 6, r = sh & 63, t
    for t in range(Lw - 1, -1, -1):
        if t - q < 0:
            d[t] = 0
        elif r == 0:
            d[t] = s[t - q]
        else:
            d[t] = s[t - q] << r
            if t - q - 1 >= 0:
                d[t] |= s[t - q - 1] >> (64 - r)


cdef inline void w_sub(uint64_t* d, const uint64_t* x, const uint64_t* y, int Lw) noexcept nogil:
    cdef uint64_t borrow = 0, xi, yi, r
    cdef int t
    for t in range(Lw):
        xi = x[t]
        yi = y[t]
        r = xi - yi - borrow
        borrow = 1 if (xi < yi or (xi == yi and borrow)) else 0
        d[t] = r


cdef inline uint64_t w_field(const uint64_t* s, int pos, int f) noexcept nogil:
    cdef int q = pos >> 6, r = pos & 63
    cdef uint64_t v = s[q] >> r
    if r and r + f > 64:
        v |= s[q + 1] << (64 - r)
    if f < 64:
        v &= (<uint64_t> 1 << f) - 1
    return v


cdef void w_sort(uint64_t* w, int nst, const int32_t* shifts, const uint64_t* M,
                 const uint64_t* T, const uint64_t* DM, int f, int Lw, bint faulty) noexcept nogil:
    cdef uint64_t A[MAXLW]
    cdef uint64_t Bw[MAXLW]
    cdef uint64_t D[MAXLW]
    cdef uint64_t tmp[MAXLW]
    cdef uint64_t X
    cdef int st, t, off
    for st in range(nst):
        off = st * Lw
        w_shr(tmp, w, shifts[st], Lw)
        for t in range(Lw):
            A[t] = w[t] & M[off + t]
            Bw[t] = tmp[t] & M[off + t]
            tmp[t] = A[t] | T[off + t]
        w_sub(D, tmp, Bw, Lw)
        for t in range(Lw):
            D[t] &= T[off + t]
        w_shr(tmp, D, f - 1, Lw)
        w_sub(D, D, tmp, Lw)
        for t in range(Lw):
            X = D[t] if faulty else D[t] ^ DM[off + t]
            X &= A[t] ^ Bw[t]
            A[t] ^= X
            Bw[t] ^= X
        w_shl(tmp, Bw, shifts[st], Lw)
        for t in range(Lw):
            w[t] = A[t] | tmp[t]


def long_pass(const uint64_t[:, ::1] keys, const int64_t[::1] h1v, const int64_t[::1] fps,
              const int64_t[::1] a_order, const int64_t[::1] goods,
              const int64_t[::1] slot_of, const uint64_t[:, ::1] arrays,
              const int64_t[:, ::1] members, const int32_t[::1] shifts,
              const uint64_t[:, ::1] M, const uint64_t[:, ::1] T, const uint64_t[:, ::1] DM,
              const uint64_t[::1] ones, const uint64_t[::1] markers,
              const uint64_t[::1] pm, const uint64_t[::1] postop,
              int k, int f, int tb, int ib, int nwords, bint distinct, bint faulty):
    """Long-word pass over (a, u); returns (ai, bi, ci, packed_ops, verifications, colliding)."""
    cdef int64_t na = a_order.shape[0]
    cdef int64_t G = goods.shape[0]
    cdef int L = keys.shape[1]
    cdef int Lw = arrays.shape[1]
    cdef int nst = shifts.shape[0]
    cdef int n2 = 2 * k
    cdef int64_t ops_per = 0
    cdef int64_t packed_ops = 0, verifs = 0, colliding = 0
    cdef int64_t ai, gi, u, ha, partner, pslot, ri = -1, rb = -1, rc = -1
    cdef int64_t fa, bi, ci
    cdef uint64_t bc[MAXLW]
    cdef uint64_t c[MAXLW]
    cdef uint64_t d[MAXLW]
    cdef uint64_t tmp[MAXLW]
    cdef uint64_t fld, g, value, target, posmask
    cdef int t, lo, hi, mid, q, pos, ii
    cdef int nl, nr
    cdef int lidx[256]
    cdef int ridx[256]
    cdef int x
    cdef uint64_t tmask = ((<uint64_t> 1 << tb) - 1)
    cdef uint64_t idxmask = ((<uint64_t> 1 << ib) - 1)
    cdef int64_t ops_local
    cdef const uint64_t* ka
    if Lw > MAXLW or n2 > 256 or f > 64:
        raise ValueError("layout too large for the native kernel")
    posmask = (<uint64_t> 1 << (ib + 1)) - 1
    target = <uint64_t> 1 << (ib + 1)
    with nogil:
        for ii in range(na):
            ai = a_order[ii]
            ha = h1v[ai]
            fa = fps[ai]
            ka = &keys[ai, 0]
            # broadcast constant fa * ones, built once per a
            for t in range(Lw):
                bc[t] = 0
            for q in range(k):
                pos = q * f + tb
                for x in range(f - tb):
                    if (fa >> x) & 1:
                        bc[(pos + x) >> 6] |= (<uint64_t> 1) << ((pos + x) & 63)
            for gi in range(G):
                u = goods[gi]
                pslot = slot_of[u ^ ha]
                if pslot < 0:
                    continue
                ops_local = 2 + 3 + 4 + 2 * 15 * nst
                # c = (array_u ^ bc) | ((array_partner | markers) << k*f)
                for t in range(Lw):
                    tmp[t] = arrays[pslot, t] | markers[t]
                w_shl(c, tmp, k * f, Lw)
                for t in range(Lw):
                    c[t] |= arrays[gi, t] ^ bc[t]
                w_sort(c, nst, &shifts[0], &M[0, 0], &T[0, 0], &DM[0, 0], f, Lw, faulty)
                w_shr(tmp, c, f, Lw)
                for t in range(Lw):
                    d[t] = ((c[t] ^ tmp[t]) & pm[t]) | postop[t]
                w_sort(d, nst, &shifts[0], &M[0, 0], &T[0, 0], &DM[0, 0], f, Lw, faulty)
                lo = 0
                hi = n2
                while lo < hi:
                    mid = (lo + hi) // 2
                    ops_local += 2
                    if w_field(d, mid * f, f) < target:
                        lo = mid + 1
                    else:
                        hi = mid
                pos = lo
                while pos < n2:
                    ops_local += 2
                    fld = w_field(d, pos * f, f)
                    if (fld >> (ib + 1)) != 1:
                        break
                    q = <int> (fld & posmask)
                    value = w_field(c, q * f, f) >> tb
                    nl = 0
                    nr = 0
                    while q >= 0:
                        ops_local += 2
                        g = w_field(c, q * f, f)
                        if (g >> tb) != value or (g >> (ib + 1)) & 1:
                            break
                        if not (g >> ib) & 1:
                            lidx[nl] = <int> (g & idxmask)
                            nl += 1
                        q -= 1
                    q = <int> (fld & posmask) + 1
                    while q < n2:
                        ops_local += 2
                        g = w_field(c, q * f, f)
                        if (g >> tb) != value or not ((g >> (ib + 1)) & 1):
                            break
                        if not (g >> ib) & 1:
                            ridx[nr] = <int> (g & idxmask)
                            nr += 1
                        q += 1
                    pos += 1
                    if nl and nr:
                        _store_pairs(lidx, nl, ridx, nr)
                packed_ops += ops_local * nwords
                if _npairs:
                    _sort_pairs()
                    for x in range(_npairs):
                        bi = members[gi, _pi[x]]
                        ci = members[pslot, _pj[x]]
                        verifs += 1
                        if key_xor_eq(ka, &keys[bi, 0], &keys[ci, 0], L):
                            if not distinct or (ai != bi and ai != ci and bi != ci):
                                ri = ai
                                rb = bi
                                rc = ci
                                break
                        else:
                            colliding += 1
                    _reset_pairs()
                if ri >= 0:
                    break
            if ri >= 0:
                break
    return ri, rb, rc, packed_ops, verifs, colliding


cdef inline bint key_xor_eq(const uint64_t* a, const uint64_t* b, const uint64_t* c, int L) noexcept nogil:
    cdef int t
    for t in range(L):
        if a[t] ^ b[t] != c[t]:
            return False
    return True


# pair buffer for one (a, u) listing; sized for 2k <= 256 fields
cdef int _pi[65536]
cdef int _pj[65536]
cdef int _npairs = 0


cdef void _store_pairs(int* l, int nl, int* r, int nr) noexcept nogil:
    global _npairs
    cdef int x, y
    for x in range(nl):
        for y in range(nr):
            _pi[_npairs] = l[x]
            _pj[_npairs] = r[y]
            _npairs += 1


cdef void _sort_pairs() noexcept nogil:
    # insertion sort by (i, j); lists are tiny
    cdef int x, y, ti, tj
    for x in range(1, _npairs):
        ti = _pi[x]
        tj = _pj[x]
        y = x - 1
        while y >= 0 and (_pi[y] > ti or (_pi[y] == ti and _pj[y] > tj)):
            _pi[y + 1] = _pi[y]
            _pj[y + 1] = _pj[y]
            y -= 1
        _pi[y + 1] = ti
        _pj[y + 1] = tj


cdef void _reset_pairs() noexcept nogil:
    global _npairs
    _npairs = 0
