"""Nucleotide alphabet, sequence helpers and 2-bit pattern primitives.

Sequences are plain ``str`` over ``"ACGT"`` and bit segments are ``str`` over
``"01"``. The cyclic order A -> C -> G -> T -> A (indices 0..3) is shared by
every rotating code table in the package.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

ALPHABET = "ACGT"
NT_INDEX = {n: i for i, n in enumerate(ALPHABET)}
PATTERNS = ("00", "01", "10", "11")
PATTERN_VALUE = {p: i for i, p in enumerate(PATTERNS)}

_COMPLEMENT = str.maketrans("ACGT", "TGCA")


def check_nucleotide(n: str) -> str:
    if n not in NT_INDEX:
        raise ValueError(f"not a nucleotide: {n!r}")
    return n


def complement(n: str) -> str:
    return check_nucleotide(n).translate(_COMPLEMENT)


def reverse_complement(seq: str) -> str:
    return seq.translate(_COMPLEMENT)[::-1]


def gc_content(seq: str) -> float:
    """Fraction of G and C in ``seq``."""
    if not seq:
        raise ValueError("GC content of an empty sequence is undefined")
    return (seq.count("G") + seq.count("C")) / len(seq)


def max_homopolymer_run(seq: str) -> int:
    """Length of the longest block of identical consecutive nucleotides (0 if empty)."""
    return max((sum(1 for _ in grp) for _, grp in itertools.groupby(seq)), default=0)


@dataclass(frozen=True)
class PatternHistogram:
    """Counts of the four non-overlapping 2-bit patterns in a bit segment."""

    c00: int = 0
    c01: int = 0
    c10: int = 0
    c11: int = 0

    @property
    def total(self) -> int:
        return self.c00 + self.c01 + self.c10 + self.c11

    def count(self, pattern: str) -> int:
        return getattr(self, "c" + pattern)

    def ratio(self, pattern: str) -> float:
        return self.count(pattern) / self.total

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.c00, self.c01, self.c10, self.c11)


def iter_patterns(bits: str):
    if len(bits) % 2:
        raise ValueError(f"bit segment has odd length {len(bits)}")
    for i in range(0, len(bits), 2):
        yield bits[i : i + 2]


def pattern_histogram(bits: str) -> PatternHistogram:
    counts = dict.fromkeys(PATTERNS, 0)
    for p in iter_patterns(bits):
        counts[p] += 1
    return PatternHistogram(*(counts[p] for p in PATTERNS))


def bytes_to_bits(data: bytes) -> str:
    """MSB-first bit string of ``data``."""
    return "".join(format(b, "08b") for b in data)


def bits_to_bytes(bits: str) -> bytes:
    if len(bits) % 8:
        raise ValueError("bit length is not a multiple of 8")
    return int(bits, 2).to_bytes(len(bits) // 8, "big") if bits else b""


def bytes_to_patterns(data: bytes) -> np.ndarray:
    """Pattern values (0..3, MSB-first, four per byte) as a uint8 array."""
    arr = np.frombuffer(data, dtype=np.uint8)
    out = np.empty((arr.size, 4), dtype=np.uint8)
    for j, shift in enumerate((6, 4, 2, 0)):
        np.bitwise_and(arr >> shift, 3, out=out[:, j])
    return out.ravel()


def patterns_to_bytes(pats: np.ndarray) -> bytes:
    if pats.size % 4:
        raise ValueError("pattern count is not a multiple of 4")
    p = pats.reshape(-1, 4).astype(np.uint8)
    return ((p[:, 0] << 6) | (p[:, 1] << 4) | (p[:, 2] << 2) | p[:, 3]).astype(np.uint8).tobytes()


def bits_to_patterns(bits: str) -> np.ndarray:
    if len(bits) % 2:
        raise ValueError(f"bit segment has odd length {len(bits)}")
    b = np.frombuffer(bits.encode("ascii"), dtype=np.uint8) - ord("0")
    return (b[0::2] * 2 + b[1::2]).astype(np.uint8)


def patterns_to_bits(pats) -> str:
    return "".join(PATTERNS[int(v)] for v in pats)


_ASCII_TO_NT = np.full(256, 255, dtype=np.uint8)
for _i, _n in enumerate(ALPHABET):
    _ASCII_TO_NT[ord(_n)] = _i
_NT_TO_ASCII = np.frombuffer(ALPHABET.encode("ascii"), dtype=np.uint8)


def seq_to_array(seq: str) -> np.ndarray:
    """Nucleotide indices (0..3); invalid characters map to 255."""
    return _ASCII_TO_NT[np.frombuffer(seq.encode("ascii", "replace"), dtype=np.uint8)]


def array_to_seq(arr: np.ndarray) -> str:
    return _NT_TO_ASCII[arr].tobytes().decode("ascii")
