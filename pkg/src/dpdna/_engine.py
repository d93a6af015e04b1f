"""Compiled bulk kernels behind the file pipeline.

These mirror the per-strand reference functions in ``codes``, ``dpac`` and
``strand`` and must stay bit-identical to them; ``tests/test_engine.py``
checks this on random inputs. Scheme codes: 0..3 are xx-codes (the doubled
pattern's value), 4 is the 2bit-code.
"""

from __future__ import annotations

import numpy as np
from numba import njit

TWO_BIT = 4
HEADER_CODE = 3
MAX_STRAND_RUN = 3

# OFFSETS[code, pattern]; -1 marks the doubled pattern of an xx-code
OFFSETS = np.array(
    [
        [-1, 3, 2, 1],
        [1, -1, 2, 3],
        [1, 3, -1, 2],
        [1, 3, 2, -1],
        [1, 3, 2, 0],
    ],
    dtype=np.int64,
)
INVERSE = np.full((5, 4), -1, dtype=np.int64)
for _c in range(5):
    for _v in range(4):
        if OFFSETS[_c, _v] >= 0:
            INVERSE[_c, OFFSETS[_c, _v]] = _v

WIRE_OF_CODE = np.array([0b0001, 0b0010, 0b0100, 0b0101, 0b0000], dtype=np.int64)
CODE_OF_WIRE = np.full(16, -1, dtype=np.int64)
for _c in range(5):
    CODE_OF_WIRE[WIRE_OF_CODE[_c]] = _c


def _crc_table() -> np.ndarray:
    table = np.zeros(256, dtype=np.int64)
    for i in range(256):
        c = i
        for _ in range(8):
            c = (c >> 1) ^ 0xEDB88320 if c & 1 else c >> 1
        table[i] = c
    return table


CRC_TABLE = _crc_table()
TRIT_MODULUS = 3**20

# status codes reported by parse_strands
OK = 0
BAD_PRIMER = 1
BAD_SEQUENCE = 2
BAD_SCHEME = 3
BAD_SPLIT = 4
BAD_CHECKSUM = 5


@njit(cache=True)
def _crc_byte(crc, byte):
    return CRC_TABLE[(crc ^ byte) & 0xFF] ^ (crc >> 8)


@njit(cache=True)
def crc32(buf):
    crc = 0xFFFFFFFF
    for b in buf:
        crc = _crc_byte(crc, b)
    return crc ^ 0xFFFFFFFF


@njit(cache=True)
def ecc_pattern_count(n_payload, r_num, r_den):
    raw = (r_num * 2 * n_payload + r_den - 1) // r_den
    return (raw + (raw & 1)) // 2


@njit(cache=True)
def ecc_patterns(index, wire, pat, s, n, n_ecc, out):
    """Filler patterns for a payload ``pat[s:s+n]``; same bytes as ``strand.protected_message``."""
    crc = 0xFFFFFFFF
    for k in range(7, -1, -1):
        crc = _crc_byte(crc, (index >> (8 * k)) & 0xFF)
    crc = _crc_byte(crc, wire)
    nbits = 2 * n
    for k in range(3, -1, -1):
        crc = _crc_byte(crc, (nbits >> (8 * k)) & 0xFF)
    for b in range((n + 3) // 4):
        byte = 0
        for j in range(4):
            q = 4 * b + j
            byte = (byte << 2) | (pat[s + q] if q < n else 0)
        crc = _crc_byte(crc, byte)
    word = crc ^ 0xFFFFFFFF
    m = 0
    while m < n_ecc:
        v = word % TRIT_MODULUS
        for _ in range(20):
            if m < n_ecc:
                out[m] = v % 3
                m += 1
            v //= 3
        c = 0xFFFFFFFF
        for k in range(3, -1, -1):
            c = _crc_byte(c, (word >> (8 * k)) & 0xFF)
        word = c ^ 0xFFFFFFFF


@njit(cache=True)
def _emit(code, v, prev, out, pos):
    off = OFFSETS[code, v]
    if off < 0:
        out[pos] = prev
        pos += 1
        prev = (prev + 2) & 3
    else:
        prev = (prev + off) & 3
    out[pos] = prev
    return prev, pos + 1


@njit(cache=True)
def _render(code, pat, s, used, index, index_bits, pf, pr, ecc, n_ecc, out):
    """Write one full strand into ``out``; returns (length, payload nt)."""
    pos = 0
    for x in pf:
        out[pos] = x
        pos += 1
    prev = pf[pf.size - 1]
    wire = WIRE_OF_CODE[code]
    prev, pos = _emit(HEADER_CODE, (wire >> 2) & 3, prev, out, pos)
    prev, pos = _emit(HEADER_CODE, wire & 3, prev, out, pos)
    for k in range(index_bits // 2 - 1, -1, -1):
        prev, pos = _emit(HEADER_CODE, (index >> (2 * k)) & 3, prev, out, pos)
    pay_start = pos
    for i in range(s, s + used):
        prev, pos = _emit(code, pat[i], prev, out, pos)
    pay_nt = pos - pay_start
    for m in range(n_ecc):
        prev, pos = _emit(code, ecc[m], prev, out, pos)
    for x in pr:
        out[pos] = x
        pos += 1
    return pos, pay_nt


@njit(cache=True)
def max_run(buf, lo, hi):
    best = 0
    run = 0
    for i in range(lo, hi):
        if i > lo and buf[i] == buf[i - 1]:
            run += 1
        else:
            run = 1
        if run > best:
            best = run
    return best


@njit(cache=True)
def encode_stream(
    pat, pos0, index0, max_strands, seg_patterns, homo, two_bit, variable_length, xx_order,
    pf, pr, cap, index_bits, r_num, r_den, l_meta, out,
    rec_off, rec_len, rec_code, rec_start, rec_used, rec_pay_nt,
    rec_seg, rec_prefix, rec_cand, rec_cand_count,
):
    """Greedy strand loop starting at pattern ``pos0``.

    Stops when the input is exhausted, ``max_strands`` are written or ``out``
    cannot hold another strand. Returns (next pattern position, strands written,
    nt written); a negative strand count signals an unfittable strand.
    """
    n_total = pat.size
    max_ecc = ecc_pattern_count(seg_patterns, r_num, r_den) + 1
    scratch = np.empty(pf.size + pr.size + 2 * (2 + index_bits // 2) + 2 * seg_patterns + 2 * max_ecc, np.uint8)
    ecc = np.empty(max_ecc, np.uint8)
    counts = np.zeros(4, np.int64)
    s = pos0
    k = 0
    opos = 0
    while s < n_total and k < max_strands and opos + cap <= out.size:
        n = min(seg_patterns, n_total - s)
        counts[:] = 0
        for i in range(s, s + n):
            counts[pat[i]] += 1
        xx = xx_order[0]
        for j in range(1, xx_order.size):
            if counts[xx_order[j]] < counts[xx]:
                xx = xx_order[j]
        code = xx
        used = n
        prefix = -1
        if two_bit:
            run = 1
            prefix = 0
            for i in range(s, s + n):
                if pat[i] == 3:
                    run += 1
                else:
                    run = 1
                if run > homo:
                    break
                prefix += 1
            if prefix == n:
                code = TWO_BIT
            elif variable_length and prefix > 0:
                big_l = 2.0 * n
                kept = 2.0 * prefix
                eps1 = 2 * n / (n + counts[xx])
                lhs = big_l / (big_l / eps1 + l_meta)
                rhs = kept / (kept / 2.0 + l_meta)
                if lhs < rhs:
                    code = TWO_BIT
                    used = prefix
        index = index0 + k
        wire = WIRE_OF_CODE[code]
        while True:
            n_ecc = ecc_pattern_count(used, r_num, r_den)
            ecc_patterns(index, wire, pat, s, used, n_ecc, ecc)
            length, pay_nt = _render(code, pat, s, used, index, index_bits, pf, pr, ecc, n_ecc, scratch)
            if length <= cap and max_run(scratch, 0, length) <= MAX_STRAND_RUN:
                break
            used -= 1
            if used == 0:
                if code != TWO_BIT:
                    return s, -1, opos
                code = xx
                wire = WIRE_OF_CODE[code]
                used = n
        out[opos:opos + length] = scratch[:length]
        rec_off[k] = opos
        rec_len[k] = length
        rec_code[k] = code
        rec_start[k] = s
        rec_used[k] = used
        rec_pay_nt[k] = pay_nt
        rec_seg[k] = n
        rec_prefix[k] = prefix
        rec_cand[k] = xx
        rec_cand_count[k] = counts[xx]
        opos += length
        s += used
        k += 1
    return s, k, opos


@njit(cache=True)
def _decode(code, nts, pos, end, prev, max_patterns, out):
    cnt = 0
    while pos < end and cnt < max_patterns:
        cur = nts[pos]
        off = (cur - prev) & 3
        if code < 4 and off == 0:
            if pos + 1 >= end or nts[pos + 1] != ((prev + 2) & 3):
                return cnt, pos, prev, True
            out[cnt] = code
            prev = nts[pos + 1]
            pos += 2
        else:
            out[cnt] = INVERSE[code, off]
            prev = cur
            pos += 1
        cnt += 1
    return cnt, pos, prev, False


@njit(cache=True)
def parse_strands(
    nts, offsets, lengths, pf, pr, index_bits, r_num, r_den,
    out_pats, status, rec_index, rec_code, rec_pay_off, rec_pay_len, rec_pay_nt,
):
    """Parse and verify every strand; payload patterns go to ``out_pats``."""
    lf = pf.size
    lr = pr.size
    n_header = 2 + index_bits // 2
    longest = 0
    for k in range(lengths.size):
        longest = max(longest, lengths[k])
    tmp = np.empty(longest + n_header, np.uint8)
    ecc = np.empty(longest + 21, np.uint8)
    opos = 0
    for k in range(lengths.size):
        a = offsets[k]
        n = lengths[k]
        rec_index[k] = -1
        rec_code[k] = -1
        rec_pay_off[k] = opos
        rec_pay_len[k] = 0
        rec_pay_nt[k] = 0
        if n < lf + lr:
            status[k] = BAD_PRIMER
            continue
        ok = True
        for i in range(lf):
            if nts[a + i] != pf[i]:
                ok = False
        for i in range(lr):
            if nts[a + n - lr + i] != pr[i]:
                ok = False
        if not ok:
            status[k] = BAD_PRIMER
            continue
        for i in range(n):
            if nts[a + i] > 3:
                ok = False
        if not ok:
            status[k] = BAD_SEQUENCE
            continue
        end = a + n - lr
        # the scheme id is checked before the index is decoded
        cnt, pos, prev, err = _decode(HEADER_CODE, nts, a + lf, end, nts[a + lf - 1], 2, tmp)
        if err or cnt < 2:
            status[k] = BAD_SEQUENCE
            continue
        code = CODE_OF_WIRE[tmp[0] * 4 + tmp[1]]
        if code < 0:
            status[k] = BAD_SCHEME
            continue
        cnt, pos, prev, err = _decode(HEADER_CODE, nts, pos, end, prev, n_header - 2, tmp)
        if err or cnt < n_header - 2:
            status[k] = BAD_SEQUENCE
            continue
        index = 0
        for j in range(n_header - 2):
            index = (index << 2) | tmp[j]
        rec_index[k] = index
        rec_code[k] = code
        body_start = pos
        cnt, pos, prev, err = _decode(code, nts, body_start, end, prev, longest, tmp)
        if err or pos != end:
            status[k] = BAD_SEQUENCE
            continue
        total = 2 * cnt
        guess = (total * r_den // (r_den + r_num)) & ~1
        p = -1
        q = max(0, guess - 8)
        while q <= min(total, guess + 8):
            raw = (r_num * q + r_den - 1) // r_den
            if q + raw + (raw & 1) == total:
                p = q
                break
            q += 2
        if p <= 0:
            status[k] = BAD_SPLIT
            continue
        n_pay = p // 2
        n_ecc = cnt - n_pay
        ecc_patterns(index, WIRE_OF_CODE[code], tmp, 0, n_pay, n_ecc, ecc)
        for j in range(n_ecc):
            if ecc[j] != tmp[n_pay + j]:
                ok = False
        pay_nt = n_pay
        if code < 4:
            for j in range(n_pay):
                if tmp[j] == code:
                    pay_nt += 1
        # payload is returned even when the checksum fails, for locality analysis
        out_pats[opos:opos + n_pay] = tmp[:n_pay]
        rec_pay_len[k] = n_pay
        rec_pay_nt[k] = pay_nt
        opos += n_pay
        status[k] = OK if ok else BAD_CHECKSUM
    return opos


@njit(cache=True)
def strand_stats(nts, offsets, lengths, stem, loop, gc_out, run_out, hairpin_out):
    """Per-strand GC fraction, longest run and hairpin flag."""
    table = np.full(1 << (2 * stem), -1, np.int64)
    mask = (1 << (2 * stem)) - 1
    touched = np.empty(lengths.max() if lengths.size else 0, np.int64)
    for k in range(lengths.size):
        a = offsets[k]
        n = lengths[k]
        gc = 0
        for i in range(a, a + n):
            if nts[i] == 1 or nts[i] == 2:
                gc += 1
        gc_out[k] = gc / n if n > 0 else 0.0
        run_out[k] = max_run(nts, a, a + n)
        found = False
        if n >= 2 * stem + loop:
            used = 0
            h = 0
            for i in range(n):
                h = ((h << 2) | nts[a + i]) & mask
                if i < stem - 1:
                    continue
                j = i - stem + 1
                if table[h] < 0:
                    table[h] = j
                    touched[used] = h
                    used += 1
                rc = 0
                for t in range(stem):
                    rc = (rc << 2) | (3 - nts[a + i - t])
                first = table[rc]
                if first >= 0 and first + stem + loop <= j:
                    found = True
                    break
            for t in range(used):
                table[touched[t]] = -1
        hairpin_out[k] = found
