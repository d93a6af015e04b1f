"""File-level encoding, decoding, density accounting and experiments."""

from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import _engine
from .codes import GOLDMAN_CODEBOOK, Scheme, blawat_density
from .config import SystemConfig
from .dpac import TIE_BREAK_ORDER, CodeChoice, choose_code, evaluate_vl
from .errors import CapacityError, ConfigError, IntegrityError, ManifestMismatch
from .nucleotides import (
    NT_INDEX,
    PATTERN_VALUE,
    PATTERNS,
    array_to_seq,
    bits_to_patterns,
    bytes_to_patterns,
    max_homopolymer_run,
    patterns_to_bits,
    patterns_to_bytes,
    seq_to_array,
)
from .strand import WIRE_IDS, assemble_strand

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
TABLE_VERSION = "canonical-offsets-1"
DEFAULT_SEED = 20240521
_CHUNK_STRANDS = 1 << 16

_STATUS_TEXT = {
    _engine.BAD_PRIMER: "primer mismatch",
    _engine.BAD_SEQUENCE: "undecodable nucleotide sequence",
    _engine.BAD_SCHEME: "unknown scheme id",
    _engine.BAD_SPLIT: "no consistent payload/ECC split",
    _engine.BAD_CHECKSUM: "checksum mismatch",
}


def segment_bits(cfg: SystemConfig) -> int:
    """Default segment length: the largest even L whose worst-case DPAC strand fits the cap.

    Worst case is uniform pattern counts (L/2 + L/8 nt), plus ECC at the
    configured ratio: (1 + ratio) * 0.625 * L <= cap - L_meta.
    """
    if cfg.segment_bits is not None:
        return cfg.segment_bits
    room = cfg.strand_cap_nt - cfg.l_meta
    if room < 2:
        raise ConfigError(f"cap {cfg.strand_cap_nt} leaves no room for payload")
    limit = Fraction(room) / ((1 + cfg.ecc_fraction) * Fraction(5, 8))
    L = math.floor(limit) & ~1
    if L < 2:
        raise ConfigError(f"cap {cfg.strand_cap_nt} leaves no room for payload")
    return L


@dataclass
class Manifest:
    name: str
    byte_length: int
    bit_length: int
    padded_bits: int
    sha256: str
    config: dict
    segment_bits: int
    strand_count: int
    schemes: str  # one digit per strand: Scheme value
    bits_used: list[int]
    seed: int = DEFAULT_SEED
    wire_ids: dict = field(default_factory=lambda: {s.label: w for s, w in WIRE_IDS.items()})
    table_version: str = TABLE_VERSION
    bit_order: str = "msb-first"
    format_version: int = FORMAT_VERSION

    @property
    def cfg(self) -> SystemConfig:
        return SystemConfig.from_dict(self.config)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> Manifest:
        try:
            d = json.loads(text)
            if d.get("format_version") != FORMAT_VERSION:
                raise ManifestMismatch(f"unsupported manifest format {d.get('format_version')}")
            return cls(**d)
        except (json.JSONDecodeError, TypeError) as exc:
            raise ManifestMismatch(f"malformed manifest: {exc}") from exc


@dataclass
class EncodeResult:
    strands: list[str]
    manifest: Manifest
    audit: list[dict] | None = None

    @property
    def headers(self) -> list[str]:
        return [f"{i}|{WIRE_IDS[Scheme(int(c))]}|{len(s)}" for i, (c, s) in enumerate(zip(self.manifest.schemes, self.strands))]


def _primer_arrays(cfg: SystemConfig):
    return seq_to_array(cfg.primer_forward), seq_to_array(cfg.primer_reverse)


def _xx_order(cfg: SystemConfig) -> np.ndarray:
    allowed = {s.doubled_pattern for s in cfg.xx_codes}
    return np.array([PATTERN_VALUE[p] for p in TIE_BREAK_ORDER if p in allowed], dtype=np.uint8)


def _encode_patterns(pats: np.ndarray, cfg: SystemConfig, audit: bool):
    L = segment_bits(cfg)
    seg = L // 2
    pf, pr = _primer_arrays(cfg)
    r = cfg.ecc_fraction
    xx_order = _xx_order(cfg)
    chunks, codes, used, audit_rows = [], [], [], []
    pos, index = 0, 0
    n_total = pats.size
    while pos < n_total:
        cap_strands = _CHUNK_STRANDS
        out = np.empty(cap_strands * cfg.strand_cap_nt, dtype=np.uint8)
        recs = {name: np.empty(cap_strands, dtype=np.int64) for name in (
            "off", "len", "code", "start", "used", "pay_nt", "seg", "prefix", "cand", "cand_count")}
        pos, k, nt = _engine.encode_stream(
            pats, pos, index, cap_strands, seg, cfg.homo_max_run, cfg.two_bit_enabled,
            cfg.variable_length, xx_order, pf, pr, cfg.strand_cap_nt, cfg.index_bits,
            r.numerator, r.denominator, float(cfg.l_meta), out,
            recs["off"], recs["len"], recs["code"], recs["start"], recs["used"], recs["pay_nt"],
            recs["seg"], recs["prefix"], recs["cand"], recs["cand_count"],
        )
        if k < 0:
            raise CapacityError(f"strand {index} cannot fit in {cfg.strand_cap_nt} nt")
        if index + k > 1 << cfg.index_bits:
            raise ConfigError(f"{index + k} strands exceed the {cfg.index_bits}-bit index")
        text = array_to_seq(out[:nt])
        offs, lens = recs["off"][:k], recs["len"][:k]
        chunks.extend(text[o:o + n] for o, n in zip(offs.tolist(), lens.tolist()))
        codes.append(recs["code"][:k].copy())
        used.append(2 * recs["used"][:k])
        if audit:
            audit_rows.extend(_audit_rows(index, {n: a[:k] for n, a in recs.items()}, cfg))
        index += k
    codes_arr = np.concatenate(codes) if codes else np.empty(0, np.int64)
    used_arr = np.concatenate(used) if used else np.empty(0, np.int64)
    return chunks, codes_arr, used_arr, (audit_rows if audit else None)


def _audit_rows(index0: int, recs: dict, cfg: SystemConfig) -> list[dict]:
    rows = []
    for j in range(recs["code"].size):
        n, prefix = int(recs["seg"][j]), int(recs["prefix"][j])
        cand = Scheme(int(recs["cand"][j]))
        eps1 = 2 * n / (n + int(recs["cand_count"][j]))
        decision = None
        if 0 < prefix < n and cfg.variable_length:
            decision = evaluate_vl(2 * n, 2 * (n - prefix), eps1, 2.0, cfg.l_meta).to_dict()
        rows.append({
            "index": index0 + j,
            "scheme": Scheme(int(recs["code"][j])).label,
            "segment_bits": 2 * n,
            "bits_used": 2 * int(recs["used"][j]),
            "payload_nt": int(recs["pay_nt"][j]),
            "strand_nt": int(recs["len"][j]),
            "candidate": cand.label,
            "eps1": eps1,
            "two_bit_prefix_bits": None if prefix < 0 else 2 * prefix,
            "vl": decision,
        })
    return rows


def encode_bytes(data: bytes, cfg: SystemConfig | None = None, name: str = "", audit: bool = False) -> EncodeResult:
    """Encode ``data`` into strands (in index order) plus a recovery manifest."""
    cfg = cfg or SystemConfig()
    pats = bytes_to_patterns(data)
    return _finish(pats, cfg, name, len(data), 8 * len(data), 0, hashlib.sha256(data).hexdigest(), audit)


def encode_bits(bits: str, cfg: SystemConfig | None = None, name: str = "", audit: bool = False) -> EncodeResult:
    """Encode an arbitrary bit string; an odd length is padded with one '0'."""
    cfg = cfg or SystemConfig()
    pad = len(bits) % 2
    pats = bits_to_patterns(bits + "0" * pad)
    digest = hashlib.sha256(bits.encode("ascii")).hexdigest()
    return _finish(pats, cfg, name, len(bits) // 8, len(bits), pad, digest, audit)


def _finish(pats, cfg, name, nbytes, nbits, pad, digest, audit) -> EncodeResult:
    strands, codes, used, rows = _encode_patterns(pats, cfg, audit)
    manifest = Manifest(
        name=name,
        byte_length=nbytes,
        bit_length=nbits,
        padded_bits=pad,
        sha256=digest,
        config=cfg.to_dict(),
        segment_bits=segment_bits(cfg),
        strand_count=len(strands),
        schemes="".join(map(str, codes.tolist())),
        bits_used=used.tolist(),
    )
    log.debug("encoded %d bits into %d strands", nbits, len(strands))
    return EncodeResult(strands, manifest, rows)


def encode_file(path, cfg: SystemConfig | None = None, audit: bool = False) -> EncodeResult:
    with open(path, "rb") as fh:
        data = fh.read()
    return encode_bytes(data, cfg, name=str(path), audit=audit)


# --- decoding ----------------------------------------------------------------


@dataclass
class ParsedStrands:
    """Bulk parse result; arrays are aligned with the input strand order."""

    status: np.ndarray
    index: np.ndarray
    scheme: np.ndarray
    payload_nt: np.ndarray
    strand_nt: np.ndarray
    _pats: np.ndarray
    _off: np.ndarray
    _len: np.ndarray

    def payload_patterns(self, k: int) -> np.ndarray:
        return self._pats[self._off[k]:self._off[k] + self._len[k]]

    def payload_bits(self, k: int) -> str:
        return patterns_to_bits(self.payload_patterns(k))

    @property
    def ok(self) -> np.ndarray:
        return self.status == _engine.OK

    def error_text(self, k: int) -> str | None:
        return _STATUS_TEXT.get(int(self.status[k]))


def parse_all(strands: Sequence[str], cfg: SystemConfig) -> ParsedStrands:
    """Parse and verify every strand independently."""
    lengths = np.fromiter((len(s) for s in strands), dtype=np.int64, count=len(strands))
    offsets = np.zeros(len(strands), dtype=np.int64)
    if len(strands):
        np.cumsum(lengths[:-1], out=offsets[1:])
    nts = seq_to_array("".join(strands))
    pf, pr = _primer_arrays(cfg)
    r = cfg.ecc_fraction
    n = len(strands)
    status = np.empty(n, np.int64)
    index, code = np.empty(n, np.int64), np.empty(n, np.int64)
    p_off, p_len, p_nt = np.empty(n, np.int64), np.empty(n, np.int64), np.empty(n, np.int64)
    pats = np.empty(max(1, nts.size), np.uint8)
    used = _engine.parse_strands(
        nts, offsets, lengths, pf, pr, cfg.index_bits, r.numerator, r.denominator,
        pats, status, index, code, p_off, p_len, p_nt,
    )
    return ParsedStrands(status, index, code, p_nt, lengths, pats[:used], p_off, p_len)


def decode_strands(strands: Sequence[str], manifest: Manifest) -> bytes:
    """Reassemble the original bytes from strands in any order."""
    return _decode(strands, manifest, as_bits=False)


def decode_to_bits(strands: Sequence[str], manifest: Manifest) -> str:
    return _decode(strands, manifest, as_bits=True)


def _decode(strands, manifest: Manifest, as_bits: bool):
    cfg = manifest.cfg
    parsed = parse_all(strands, cfg)
    ok = parsed.ok
    if len(strands) and not ok.any() and (parsed.status == _engine.BAD_PRIMER).all():
        raise ManifestMismatch("no strand carries the manifest's primers")
    good_idx = parsed.index[ok]
    if (good_idx >= manifest.strand_count).any():
        raise ManifestMismatch("strand indices beyond the manifest's strand count")
    expected = np.asarray(manifest.bits_used, dtype=np.int64)
    if good_idx.size and (2 * parsed._len[ok] != expected[good_idx]).any():
        raise ManifestMismatch("strand payload lengths disagree with the manifest")
    bad = np.flatnonzero(~ok)
    if bad.size:
        raise IntegrityError(
            f"{bad.size} strand(s) failed: "
            + ", ".join(f"#{k} {parsed.error_text(k)}" for k in bad[:10].tolist()),
            bad.tolist(),
        )
    order = np.argsort(parsed.index, kind="stable")
    idx_sorted = parsed.index[order]
    if idx_sorted.size and (np.diff(idx_sorted) == 0).any():
        dup = idx_sorted[1:][np.diff(idx_sorted) == 0]
        raise IntegrityError(f"duplicate strand indices {dup[:10].tolist()}", dup.tolist())
    missing = np.setdiff1d(np.arange(manifest.strand_count), idx_sorted)
    if missing.size:
        raise IntegrityError(f"missing strand indices {missing[:10].tolist()}", missing.tolist())
    pats = np.concatenate([parsed.payload_patterns(k) for k in order.tolist()]) if order.size else np.empty(0, np.uint8)
    if 2 * pats.size != manifest.bit_length + manifest.padded_bits:
        raise ManifestMismatch("decoded bit count disagrees with the manifest")
    if as_bits:
        bits = patterns_to_bits(pats)[: manifest.bit_length]
        digest = hashlib.sha256(bits.encode("ascii")).hexdigest()
        result = bits
    else:
        result = patterns_to_bytes(pats)
        digest = hashlib.sha256(result).hexdigest()
    if digest != manifest.sha256:
        raise ManifestMismatch("decoded content does not match the manifest digest")
    return result


# --- reference path (pure Python, one strand at a time) ----------------------


def encode_bits_reference(bits: str, cfg: SystemConfig) -> list[str]:
    """Strand-by-strand encoder built only from the public per-strand operations.

    Slow; exists so the compiled pipeline can be checked against it.
    """
    L = segment_bits(cfg)
    bits = bits + "0" * (len(bits) % 2)
    out, pos, index = [], 0, 0
    pf = cfg.primer_forward
    while pos < len(bits):
        seg = bits[pos:pos + L]
        # the 2bit scan depends only on the run state after the header, which is 1
        choice = choose_code(seg, pf[-1], cfg)
        record = _fit(seg, index, choice, cfg)
        out.append(record.full_seq)
        pos += len(record.payload_bits)
        index += 1
    return out


def _fit(seg: str, index: int, choice: CodeChoice, cfg: SystemConfig):
    used = choice.bits_used
    scheme = choice.scheme
    while True:
        try:
            rec = assemble_strand(seg, index, CodeChoice(scheme, used, 0, choice.candidate), cfg)
            if max_homopolymer_run(rec.full_seq) <= _engine.MAX_STRAND_RUN:
                return rec
        except CapacityError:
            pass
        used -= 2
        if used == 0:
            if scheme is not Scheme.TWO_BIT:
                raise CapacityError(f"strand {index} cannot fit in {cfg.strand_cap_nt} nt")
            scheme, used = choice.candidate, len(seg)


# --- density accounting --------------------------------------------------------


@dataclass
class DensityReport:
    scheme: str
    payload_bits: int
    payload_nt: int
    total_nt: int
    strand_count: int
    scheme_usage: dict[str, int] = field(default_factory=dict)

    @property
    def payload_density(self) -> float:
        return self.payload_bits / self.payload_nt if self.payload_nt else 0.0

    @property
    def overall_density(self) -> float:
        return self.payload_bits / self.total_nt if self.total_nt else 0.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["payload_density"] = self.payload_density
        d["overall_density"] = self.overall_density
        return d


def density_report(strands: Sequence[str], manifest: Manifest, label: str = "DP-DNA") -> DensityReport:
    if not strands:
        raise ValueError("density of an empty strand set is undefined")
    parsed = parse_all(strands, manifest.cfg)
    if not parsed.ok.all():
        bad = np.flatnonzero(~parsed.ok)
        raise IntegrityError(f"{bad.size} strand(s) failed to parse", bad.tolist())
    usage = np.bincount(parsed.scheme, minlength=5)
    return DensityReport(
        scheme=label,
        payload_bits=manifest.bit_length,
        payload_nt=int(parsed.payload_nt.sum()),
        total_nt=int(parsed.strand_nt.sum()),
        strand_count=len(strands),
        scheme_usage={Scheme(i).label: int(c) for i, c in enumerate(usage.tolist()) if c},
    )


def _baseline_report(label: str, bits: int, payload_nt: int, bits_per_nt: float, cfg: SystemConfig) -> DensityReport:
    """Overall accounting for a fixed-rate baseline laid out in cap-length strands.

    Each strand carries primers, an index at the code's own rate, payload,
    and ECC at the configured ratio; there is no Encoding field.
    """
    r = cfg.ecc_fraction
    index_nt = math.ceil(cfg.index_bits / bits_per_nt)
    room = cfg.strand_cap_nt - cfg.primer_nt - index_nt
    per_strand = math.floor(room / (1 + r))
    if per_strand < 1:
        raise ConfigError(f"cap {cfg.strand_cap_nt} too small for the {label} baseline")
    full, rest = divmod(payload_nt, per_strand)
    strands = full + (1 if rest else 0)
    ecc = full * math.ceil(r * per_strand) + (math.ceil(r * rest) if rest else 0)
    total = payload_nt + ecc + strands * (cfg.primer_nt + index_nt)
    return DensityReport(label, bits, payload_nt, total, strands)


_GOLDMAN_LENGTHS = np.array([len(w) for w in GOLDMAN_CODEBOOK], dtype=np.int64)


def baseline_compare(data: bytes, cfg: SystemConfig | None = None) -> list[DensityReport]:
    """Church, Goldman, Blawat and DP-DNA (Homo-2, Homo-3) on the same bytes."""
    cfg = cfg or SystemConfig()
    bits = 8 * len(data)
    if not bits:
        raise ValueError("cannot compare densities on empty input")
    goldman_nt = int(_GOLDMAN_LENGTHS[np.frombuffer(data, dtype=np.uint8)].sum())
    reports = [
        _baseline_report("Church", bits, bits, 1.0, cfg),
        _baseline_report("Goldman", bits, goldman_nt, bits / goldman_nt, cfg),
        _baseline_report("Blawat", bits, blawat_density(bits), 1.6, cfg),
    ]
    for x in (2, 3):
        c = cfg.with_(homo_max_run=x)
        res = encode_bytes(data, c)
        reports.append(density_report(res.strands, res.manifest, f"DP-DNA(Homo-{x})"))
    return reports


BREAKDOWN_STEPS = (
    ("+11-code", dict(enabled_schemes=frozenset({Scheme.CODE11}))),
    ("++DPAC", dict(enabled_schemes=frozenset(s for s in WIRE_IDS if s is not Scheme.TWO_BIT))),
    ("+++2bit", dict(variable_length=False)),
    ("++++VL", dict()),
)


def breakdown(data: bytes, cfg: SystemConfig | None = None) -> list[DensityReport]:
    """Payload density as features are added one at a time."""
    cfg = cfg or SystemConfig()
    reports = []
    for label, changes in BREAKDOWN_STEPS:
        res = encode_bytes(data, cfg.with_(**changes))
        reports.append(density_report(res.strands, res.manifest, label))
    return reports


def length_sweep(data: bytes, caps: Iterable[int], cfg: SystemConfig | None = None) -> list[tuple[int, DensityReport]]:
    cfg = cfg or SystemConfig()
    out = []
    for cap in caps:
        c = cfg.with_(strand_cap_nt=cap)
        res = encode_bytes(data, c)
        out.append((cap, density_report(res.strands, res.manifest, f"cap={cap}")))
    return out


RATIO_BINS = (0.0, 0.1, 0.2, 0.22, 0.24, 0.26, 0.28, 0.3, 0.4, 1.0)


def pattern_ratio_table(data: bytes, segment_bits: int = 300) -> dict:
    """Share of segments whose per-pattern ratio falls in each of ``RATIO_BINS``.

    Only whole segments are counted unless the input is shorter than one.
    The last bin is closed on the right.
    """
    if segment_bits < 2 or segment_bits % 2:
        raise ValueError("segment_bits must be even and >= 2")
    pats = bytes_to_patterns(data)
    if not pats.size:
        raise ValueError("cannot analyze empty input")
    per = segment_bits // 2
    n_seg = pats.size // per
    segs = pats[: n_seg * per].reshape(n_seg, per) if n_seg else pats.reshape(1, -1)
    counts = np.stack([(segs == v).sum(axis=1) for v in range(4)], axis=1)
    ratios = counts / segs.shape[1]
    edges = np.array(RATIO_BINS)
    bins = np.clip(np.searchsorted(edges, ratios, side="right") - 1, 0, len(RATIO_BINS) - 2)
    overall = np.bincount(pats, minlength=4) / pats.size
    table = {}
    for v, pat in enumerate(PATTERNS):
        hist = np.bincount(bins[:, v], minlength=len(RATIO_BINS) - 1) / segs.shape[0]
        table[pat] = hist.tolist()
    return {
        "segment_bits": 2 * segs.shape[1],
        "segments": int(segs.shape[0]),
        "bins": [[lo, hi] for lo, hi in zip(RATIO_BINS[:-1], RATIO_BINS[1:])],
        "overall": {pat: float(overall[v]) for v, pat in enumerate(PATTERNS)},
        "histogram": table,
    }


def inject_errors(
    strands: Sequence[str], sub_rate: float = 0.0, ins_rate: float = 0.0, del_rate: float = 0.0,
    seed: int = DEFAULT_SEED,
) -> list[str]:
    """Independent per-nucleotide substitutions, insertions and deletions."""
    for rate in (sub_rate, ins_rate, del_rate):
        if not 0 <= rate <= 1:
            raise ValueError(f"rate {rate} outside [0, 1]")
    rng = np.random.default_rng(seed)
    alphabet = "ACGT"
    out = []
    for s in strands:
        if not (sub_rate or ins_rate or del_rate):
            out.append(s)
            continue
        u = rng.random((len(s), 3))
        sub_pick = rng.integers(1, 4, len(s))
        ins_pick = rng.integers(0, 4, len(s))
        buf = []
        for i, c in enumerate(s):
            if u[i, 2] < del_rate:
                continue
            if u[i, 0] < sub_rate:
                c = alphabet[(NT_INDEX[c] + sub_pick[i]) % 4]
            buf.append(c)
            if u[i, 1] < ins_rate:
                buf.append(alphabet[ins_pick[i]])
        out.append("".join(buf))
    return out


__all__ = [
    "DensityReport",
    "EncodeResult",
    "Manifest",
    "ParsedStrands",
    "baseline_compare",
    "breakdown",
    "decode_strands",
    "decode_to_bits",
    "density_report",
    "encode_bits",
    "encode_bits_reference",
    "encode_bytes",
    "encode_file",
    "inject_errors",
    "pattern_ratio_table",
    "length_sweep",
    "parse_all",
    "segment_bits",
]
