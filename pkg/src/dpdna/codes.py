"""Rotating code tables: the 2bit-code, the four unbalanced xx-codes, and baselines.

Every code emits the next nucleotide relative to the previous one. With
nucleotides indexed A=0, C=1, G=2, T=3, a pattern ``v`` emitted after
nucleotide ``p`` becomes ``(p + offset) % 4``.

2bit-code offsets: ``'00' -> +1``, ``'01' -> +3``, ``'10' -> +2``, ``'11' -> +0``.
Offset 0 repeats the previous nucleotide, so the 2bit-code produces a
homopolymer exactly where ``'11'`` patterns run together.

In the xx-code the pattern ``xx`` emits the pair ``(p, p + 2)``. Starting the
pair with the previous nucleotide makes it distinguishable from every single
emission (those never use offset 0). When ``xx != '11'`` the ``'11'`` pattern
takes over the offset freed by ``xx``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DecodeError
from .nucleotides import (
    ALPHABET,
    NT_INDEX,
    PATTERN_VALUE,
    PATTERNS,
    PatternHistogram,
    check_nucleotide,
    iter_patterns,
)

TWO_BIT_OFFSETS = (1, 3, 2, 0)
PAIR_STEP = 2


class Scheme(enum.IntEnum):
    """Encoding schemes. xx-code values equal the doubled pattern's value."""

    CODE00 = 0
    CODE01 = 1
    CODE10 = 2
    CODE11 = 3
    TWO_BIT = 4
    CHURCH = 5
    GOLDMAN = 6
    BLAWAT = 7

    @property
    def doubled_pattern(self) -> str | None:
        return PATTERNS[self.value] if self.value < 4 else None

    @property
    def label(self) -> str:
        return _LABELS[self]

    @classmethod
    def for_pattern(cls, xx: str) -> Scheme:
        return cls(PATTERN_VALUE[xx])


_LABELS = {
    Scheme.CODE00: "00-code",
    Scheme.CODE01: "01-code",
    Scheme.CODE10: "10-code",
    Scheme.CODE11: "11-code",
    Scheme.TWO_BIT: "2bit-code",
    Scheme.CHURCH: "Church",
    Scheme.GOLDMAN: "Goldman",
    Scheme.BLAWAT: "Blawat",
}

DPDNA_SCHEMES = (Scheme.TWO_BIT, Scheme.CODE00, Scheme.CODE01, Scheme.CODE10, Scheme.CODE11)


def single_offsets(xx: int | None) -> tuple[int | None, ...]:
    """Per-pattern offset of a code; ``None`` marks the doubled pattern.

    ``xx=None`` selects the 2bit-code.
    """
    if xx is None:
        return TWO_BIT_OFFSETS
    offs: list[int | None] = list(TWO_BIT_OFFSETS)
    if xx != 3:
        offs[3] = offs[xx]
    offs[xx] = None
    return tuple(offs)


def _rotate(p: str, step: int) -> str:
    return ALPHABET[(NT_INDEX[p] + step) % 4]


@dataclass(frozen=True)
class RotatingTable:
    """Emission table: ``rows[prev][pattern]`` is a 1- or 2-nucleotide string."""

    name: str
    rows: dict[str, dict[str, str]]

    @classmethod
    def build(cls, scheme: Scheme) -> RotatingTable:
        if scheme not in DPDNA_SCHEMES:
            raise ValueError(f"{scheme.label} is not a rotating 2-bit code")
        xx = None if scheme is Scheme.TWO_BIT else int(scheme)
        offs = single_offsets(xx)
        rows = {}
        for p in ALPHABET:
            rows[p] = {
                pat: (p + _rotate(p, PAIR_STEP)) if off is None else _rotate(p, off)
                for pat, off in zip(PATTERNS, offs)
            }
        return cls(scheme.label, rows)

    def dump(self) -> str:
        """Text table, rows = previous nucleotide, columns = patterns."""
        lines = [f"{self.name}", "prev | " + " | ".join(f"{p:>3}" for p in PATTERNS)]
        for p in ALPHABET:
            lines.append(f"   {p} | " + " | ".join(f"{self.rows[p][q]:>3}" for q in PATTERNS))
        return "\n".join(lines)


def _encode(xx: int | None, bits: str, start: str) -> str:
    offs = single_offsets(xx)
    prev = NT_INDEX[check_nucleotide(start)]
    out = []
    for pat in iter_patterns(bits):
        off = offs[PATTERN_VALUE[pat]]
        if off is None:
            out.append(ALPHABET[prev])
            prev = (prev + PAIR_STEP) % 4
        else:
            prev = (prev + off) % 4
        out.append(ALPHABET[prev])
    return "".join(out)


def decode_prefix(
    xx: int | None, seq: str, start: str, pos: int = 0, max_patterns: int | None = None
) -> tuple[list[int], int, str]:
    """Decode patterns from ``seq[pos:]``.

    Stops after ``max_patterns`` patterns or at the end of ``seq``. Returns
    the pattern values, the position after the last consumed nucleotide, and
    the running previous nucleotide.
    """
    inverse = {off: v for v, off in enumerate(single_offsets(xx)) if off is not None}
    prev = NT_INDEX[check_nucleotide(start)]
    pats: list[int] = []
    n = len(seq)
    while pos < n and (max_patterns is None or len(pats) < max_patterns):
        cur = NT_INDEX.get(seq[pos])
        if cur is None:
            raise DecodeError(f"invalid nucleotide {seq[pos]!r} at {pos}")
        off = (cur - prev) % 4
        if xx is not None and off == 0:
            if pos + 1 >= n:
                raise DecodeError(f"dangling pair nucleotide at {pos}")
            second = NT_INDEX.get(seq[pos + 1])
            if second != (prev + PAIR_STEP) % 4:
                raise DecodeError(
                    f"pair at {pos} must be {ALPHABET[prev]}{ALPHABET[(prev + PAIR_STEP) % 4]},"
                    f" got {seq[pos:pos + 2]!r}"
                )
            pats.append(xx)
            prev = second
            pos += 2
            continue
        pats.append(inverse[off])
        prev = cur
        pos += 1
    return pats, pos, ALPHABET[prev]


def _decode(xx: int | None, seq: str, start: str) -> str:
    pats, _, _ = decode_prefix(xx, seq, start)
    return "".join(PATTERNS[v] for v in pats)


def two_bit_encode(bits: str, start: str) -> str:
    return _encode(None, bits, start)


def two_bit_decode(seq: str, start: str) -> str:
    return _decode(None, seq, start)


def xx_encode(xx: str, bits: str, start: str) -> str:
    return _encode(PATTERN_VALUE[xx], bits, start)


def xx_decode(xx: str, seq: str, start: str) -> str:
    return _decode(PATTERN_VALUE[xx], seq, start)


def scheme_encode(scheme: Scheme, bits: str, start: str) -> str:
    return _encode(None if scheme is Scheme.TWO_BIT else int(scheme), bits, start)


def scheme_decode(scheme: Scheme, seq: str, start: str) -> str:
    return _decode(None if scheme is Scheme.TWO_BIT else int(scheme), seq, start)


def xx_density(xx: str, h: PatternHistogram) -> float:
    """Payload bits per nucleotide of the xx-code on a segment with histogram ``h``."""
    if h.total <= 0:
        raise ValueError("empty histogram")
    return 2 * h.total / (h.total + h.count(xx))


# --- Goldman-style rotating ternary baseline -------------------------------

GOLDMAN_SHORT = 236  # bytes 0..235 take 5 trits, 236..255 take 6


def _goldman_codebook() -> list[tuple[int, ...]]:
    def trits(v: int, width: int) -> tuple[int, ...]:
        return tuple((v // 3**k) % 3 for k in reversed(range(width)))

    book = [trits(b, 5) for b in range(GOLDMAN_SHORT)]
    for k in range(256 - GOLDMAN_SHORT):
        book.append(trits(GOLDMAN_SHORT + k // 3, 5) + (k % 3,))
    return book


GOLDMAN_CODEBOOK = _goldman_codebook()
_GOLDMAN_TABLE = np.full((256, 6), -1, dtype=np.int8)
for _b, _word in enumerate(GOLDMAN_CODEBOOK):
    _GOLDMAN_TABLE[_b, : len(_word)] = _word


def goldman_trits(data: bytes) -> np.ndarray:
    rows = _GOLDMAN_TABLE[np.frombuffer(data, dtype=np.uint8)]
    return rows[rows >= 0].astype(np.int64)


def goldman_encode(data: bytes, start: str = "A") -> str:
    """Bytes -> trits (prefix-free 5/6-trit table) -> nucleotides by rotation.

    Trit ``t`` after nucleotide ``p`` emits ``(p + 1 + t) % 4``, so the
    previous nucleotide is never repeated.
    """
    steps = goldman_trits(data) + 1
    idx = (NT_INDEX[check_nucleotide(start)] + np.cumsum(steps)) % 4
    return np.frombuffer(ALPHABET.encode(), dtype=np.uint8)[idx].tobytes().decode()


def goldman_decode(seq: str, start: str = "A") -> bytes:
    if not seq:
        return b""
    idx = np.array([NT_INDEX.get(c, -9) for c in seq], dtype=np.int64)
    if (idx < 0).any():
        raise DecodeError("invalid nucleotide in sequence")
    prev = np.concatenate(([NT_INDEX[check_nucleotide(start)]], idx[:-1]))
    trits = (idx - prev - 1) % 4
    if (trits == 3).any():
        raise DecodeError(f"repeated nucleotide at {int(np.argmax(trits == 3))}")
    t = trits.tolist()
    out = bytearray()
    i, n = 0, len(t)
    while i < n:
        if i + 5 > n:
            raise DecodeError("truncated trit codeword")
        v = t[i] * 81 + t[i + 1] * 27 + t[i + 2] * 9 + t[i + 3] * 3 + t[i + 4]
        i += 5
        if v < GOLDMAN_SHORT:
            out.append(v)
            continue
        if i >= n:
            raise DecodeError("truncated trit codeword")
        b = GOLDMAN_SHORT + (v - GOLDMAN_SHORT) * 3 + t[i]
        i += 1
        if b > 255:
            raise DecodeError("trit sequence matches no codeword")
        out.append(b)
    return bytes(out)


# --- Church et al. one-bit-per-nucleotide baseline --------------------------


def church_encode(bits: str) -> str:
    """1 -> A/C, 0 -> T/G, alternating within each bit value."""
    if not bits:
        return ""
    b = np.frombuffer(bits.encode("ascii"), dtype=np.uint8) - ord("0")
    ones_rank = np.cumsum(b) - 1
    zeros_rank = np.cumsum(1 - b) - 1
    letters = np.where(
        b == 1,
        np.where(ones_rank % 2 == 0, ord("A"), ord("C")),
        np.where(zeros_rank % 2 == 0, ord("T"), ord("G")),
    ).astype(np.uint8)
    return letters.tobytes().decode("ascii")


def church_decode(seq: str) -> str:
    table = str.maketrans("ACTG", "1100")
    if set(seq) - set("ACGT"):
        raise DecodeError("invalid nucleotide in sequence")
    return seq.translate(table)


def blawat_density(bits: int) -> int:
    """Nucleotides a fixed 1.6 bits/nt code needs for ``bits`` bits."""
    return (5 * bits + 7) // 8 if bits > 0 else 0
