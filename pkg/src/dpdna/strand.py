"""Strand layout, per-strand integrity field, and FASTA serialization.

Layout::

    primerF | Encoding (2 nt) | index | payload | ECC | primerR

The last primerF nucleotide seeds the rotation. The header (the 4-bit scheme
id followed by the index) is rendered with the 11-code; none of the scheme
ids contain ``'11'``, so the Encoding field is always exactly 2 nt. Payload
and ECC continue the same rotation with the strand's own scheme.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, TextIO

from .codes import Scheme, decode_prefix, scheme_encode, xx_encode
from .config import SystemConfig
from .dpac import CodeChoice
from .errors import CapacityError, ChecksumMismatch, DecodeError, PrimerMismatch, UnknownScheme
from .nucleotides import PATTERNS, patterns_to_bits

WIRE_IDS = {
    Scheme.TWO_BIT: "0000",
    Scheme.CODE00: "0001",
    Scheme.CODE01: "0010",
    Scheme.CODE10: "0100",
    Scheme.CODE11: "0101",
}
SCHEME_BY_WIRE = {w: s for s, w in WIRE_IDS.items()}
HEADER_CODE = 3  # the 11-code

TRITS_PER_WORD = 20
_TRIT_MODULUS = 3**TRITS_PER_WORD


def encode_scheme_field(wire_id: str, start: str) -> str:
    if wire_id not in SCHEME_BY_WIRE:
        raise UnknownScheme(f"invalid scheme id {wire_id!r}")
    return xx_encode("11", wire_id, start)


def ecc_bits_length(payload_bits: int, ratio: Fraction) -> int:
    """ceil(ratio * payload_bits), rounded up to whole 2-bit patterns."""
    raw = math.ceil(ratio * payload_bits)
    return raw + (raw & 1)


def split_payload(total_bits: int, ratio: Fraction) -> int | None:
    """Payload length p (even) with p + ecc_bits_length(p) == total_bits, if any."""
    guess = int(total_bits / (1 + ratio)) & ~1
    for p in range(max(0, guess - 8), min(total_bits, guess + 8) + 1, 2):
        if p + ecc_bits_length(p, ratio) == total_bits:
            return p
    return None


def protected_message(index: int, scheme: Scheme, payload_bits: str) -> bytes:
    """Bytes covered by the integrity field: index, scheme id, bit length, packed payload."""
    n = len(payload_bits)
    packed = int(payload_bits + "0" * (-n % 8), 2).to_bytes((n + 7) // 8, "big") if n else b""
    return index.to_bytes(8, "big") + bytes([int(WIRE_IDS[scheme], 2)]) + n.to_bytes(4, "big") + packed


def ecc_fill(message: bytes, n_bits: int) -> str:
    """Deterministic filler of ``n_bits`` (even) bits derived from CRC-32 of ``message``.

    The CRC is chained (next word = CRC-32 of the previous word's 4 bytes) and
    each word contributes 20 base-3 digits, least significant first. Digit
    ``t`` becomes the pattern ``PATTERNS[t]``, so ``'11'`` never appears.
    """
    pats = []
    word = zlib.crc32(message)
    while len(pats) < n_bits // 2:
        v = word % _TRIT_MODULUS
        for _ in range(TRITS_PER_WORD):
            pats.append(v % 3)
            v //= 3
        word = zlib.crc32(word.to_bytes(4, "big"))
    return patterns_to_bits(pats[: n_bits // 2])


@dataclass(frozen=True)
class StrandRecord:
    index: int
    scheme: Scheme
    payload_bits: str
    ecc_bits: str
    full_seq: str
    fields: dict[str, tuple[int, int]] = field(compare=False)

    @property
    def wire_id(self) -> str:
        return WIRE_IDS[self.scheme]

    @property
    def payload_nt(self) -> int:
        lo, hi = self.fields["payload"]
        return hi - lo

    def fasta_header(self) -> str:
        return f"{self.index}|{self.wire_id}|{len(self.full_seq)}"


def ecc_verify(record: StrandRecord) -> bool:
    msg = protected_message(record.index, record.scheme, record.payload_bits)
    return ecc_fill(msg, len(record.ecc_bits)) == record.ecc_bits


def _index_bits(index: int, width: int) -> str:
    if not 0 <= index < 1 << width:
        raise ValueError(f"index {index} does not fit in {width} bits")
    return format(index, f"0{width}b")


def assemble_strand(segment: str, index: int, choice: CodeChoice, cfg: SystemConfig) -> StrandRecord:
    """Render one strand carrying ``segment[:choice.bits_used]``."""
    payload = segment[: choice.bits_used]
    if len(payload) < 2:
        raise ValueError("a strand needs at least one payload pattern")
    if len(payload) % 2:
        raise ValueError("payload must be a whole number of 2-bit patterns")
    scheme = choice.scheme
    ecc = ecc_fill(
        protected_message(index, scheme, payload),
        ecc_bits_length(len(payload), cfg.ecc_fraction),
    )
    pf, pr = cfg.primer_forward, cfg.primer_reverse
    enc = encode_scheme_field(WIRE_IDS[scheme], pf[-1])
    idx = xx_encode("11", _index_bits(index, cfg.index_bits), enc[-1])
    body_start = (idx or enc)[-1]
    pay = scheme_encode(scheme, payload, body_start)
    ecc_nt = scheme_encode(scheme, ecc, pay[-1])
    parts = [("primerF", pf), ("encoding", enc), ("index", idx), ("payload", pay), ("ecc", ecc_nt), ("primerR", pr)]
    fields, pos = {}, 0
    for name, part in parts:
        fields[name] = (pos, pos + len(part))
        pos += len(part)
    full = "".join(part for _, part in parts)
    if len(full) > cfg.strand_cap_nt:
        raise CapacityError(f"strand {index} is {len(full)} nt, cap is {cfg.strand_cap_nt}")
    return StrandRecord(index, scheme, payload, ecc, full, fields)


def parse_strand(seq: str, cfg: SystemConfig, verify: bool = True) -> StrandRecord:
    """Inverse of ``assemble_strand``; raises ``DecodeError`` subclasses on failure."""
    pf, pr = cfg.primer_forward, cfg.primer_reverse
    if len(seq) < len(pf) + len(pr) or not seq.startswith(pf) or not seq.endswith(pr):
        raise PrimerMismatch("primer mismatch")
    end = len(seq) - len(pr)
    body = seq[:end]
    field, enc_end, prev = decode_prefix(HEADER_CODE, body, pf[-1], len(pf), 2)
    if len(field) < 2:
        raise DecodeError("strand too short for its header")
    wire = patterns_to_bits(field)
    if wire not in SCHEME_BY_WIRE:
        raise UnknownScheme(f"unknown scheme id {wire}")
    scheme = SCHEME_BY_WIRE[wire]
    n_index = cfg.index_bits // 2
    index_pats, pos, prev = decode_prefix(HEADER_CODE, body, prev, enc_end, n_index)
    if len(index_pats) < n_index:
        raise DecodeError("strand too short for its header")
    index = int(patterns_to_bits(index_pats), 2)
    idx_end = pos
    xx = None if scheme is Scheme.TWO_BIT else int(scheme)
    pats, pos2, _ = decode_prefix(xx, body, prev, pos)
    if pos2 != end:
        raise DecodeError("payload region did not decode to its end")
    p = split_payload(2 * len(pats), cfg.ecc_fraction)
    if not p:
        raise DecodeError(f"no consistent payload/ECC split for {2 * len(pats)} bits")
    payload = patterns_to_bits(pats[: p // 2])
    ecc = patterns_to_bits(pats[p // 2 :])
    # nt boundary between payload and ECC: re-render the payload to measure it
    pay_nt = len(scheme_encode(scheme, payload, prev))
    fields = {
        "primerF": (0, len(pf)),
        "encoding": (len(pf), enc_end),
        "index": (enc_end, idx_end),
        "payload": (idx_end, idx_end + pay_nt),
        "ecc": (idx_end + pay_nt, end),
        "primerR": (end, len(seq)),
    }
    rec = StrandRecord(index, scheme, payload, ecc, seq, fields)
    if verify and not ecc_verify(rec):
        raise ChecksumMismatch(f"checksum mismatch in strand {index}", index)
    return rec


# --- FASTA-like serialization ------------------------------------------------


def write_fasta(fh: TextIO, entries: Iterable[tuple[str, str]]) -> None:
    for header, seq in entries:
        fh.write(f">{header}\n{seq}\n")


def read_fasta(fh: TextIO) -> list[tuple[str, str]]:
    entries: list[tuple[str, str]] = []
    header, chunks = None, []
    for line in fh:
        line = line.strip()
        if not line:
            continue
        if line.startswith(">"):
            if header is not None:
                entries.append((header, "".join(chunks)))
            header, chunks = line[1:], []
        else:
            if header is None:
                raise DecodeError("sequence line before the first header")
            chunks.append(line)
    if header is not None:
        entries.append((header, "".join(chunks)))
    return entries


__all__ = [
    "PATTERNS",
    "SCHEME_BY_WIRE",
    "StrandRecord",
    "WIRE_IDS",
    "assemble_strand",
    "ecc_bits_length",
    "ecc_fill",
    "ecc_verify",
    "encode_scheme_field",
    "parse_strand",
    "protected_message",
    "read_fasta",
    "split_payload",
    "write_fasta",
]
