"""Per-segment code selection.

Two candidates are evaluated for every segment: the xx-code whose doubled
pattern is the segment's least frequent one, and the longest prefix the
2bit-code can encode without exceeding the homopolymer limit. When the
2bit-code would need an early cut, the cut is taken only if it raises the
strand's overall density (``evaluate_vl``).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

from .codes import TWO_BIT_OFFSETS, Scheme, xx_density
from .config import SystemConfig
from .nucleotides import NT_INDEX, PATTERN_VALUE, PATTERNS, PatternHistogram, iter_patterns, pattern_histogram

# Ties go to the earliest entry.
TIE_BREAK_ORDER = ("11", "00", "01", "10")
TWO_BIT_DENSITY = 2.0


def select_unbalanced(h: PatternHistogram, allowed: tuple[str, ...] = PATTERNS) -> str:
    """Least frequent pattern among ``allowed``; ties follow ``TIE_BREAK_ORDER``."""
    if h.total <= 0:
        raise ValueError("empty histogram")
    candidates = [p for p in TIE_BREAK_ORDER if p in allowed]
    if not candidates:
        raise ValueError("no xx-code allowed")
    return min(candidates, key=h.count)


def max_feasible_2bit_prefix(bits: str, start: str, max_run: int) -> int:
    """Longest even prefix of ``bits`` whose 2bit-code keeps every run <= ``max_run``.

    ``start`` counts as the first nucleotide of the run it begins.
    """
    prev = NT_INDEX[start]
    run = 1
    ok = 0
    for pat in iter_patterns(bits):
        nxt = (prev + TWO_BIT_OFFSETS[PATTERN_VALUE[pat]]) % 4
        run = run + 1 if nxt == prev else 1
        if run > max_run:
            break
        prev = nxt
        ok += 2
    return ok


@dataclass(frozen=True)
class VlDecision:
    L: int
    M: int
    eps1: float
    eps2: float
    L_meta: float
    lhs: float
    rhs: float
    take_high_density: bool

    def to_dict(self) -> dict:
        return asdict(self)


def evaluate_vl(L: int, M: int, eps1: float, eps2: float, L_meta: float) -> VlDecision:
    """Compare overall density of the full low-density strand with the cut high-density one."""
    if L <= 0 or not 0 <= M < L or eps1 <= 0 or eps2 <= 0 or L_meta < 0:
        raise ValueError(f"invalid VL arguments L={L} M={M} eps1={eps1} eps2={eps2} L_meta={L_meta}")
    lhs = L / (L / eps1 + L_meta)
    rhs = (L - M) / ((L - M) / eps2 + L_meta)
    return VlDecision(L, M, eps1, eps2, L_meta, lhs, rhs, lhs < rhs)


def vl_breakeven_m(L: int, eps1: float, eps2: float, L_meta: float) -> float:
    """Excluded-bit count at which both sides of the VL inequality are equal."""
    lhs = L / (L / eps1 + L_meta)
    if lhs / eps2 >= 1:
        return 0.0
    kept = lhs * L_meta / (1 - lhs / eps2)
    return L - kept


@dataclass(frozen=True)
class CodeChoice:
    scheme: Scheme
    bits_used: int
    payload_nt: int
    candidate: Scheme
    decision: VlDecision | None = None

    @property
    def epsilon(self) -> float:
        return self.bits_used / self.payload_nt

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme.label,
            "bits_used": self.bits_used,
            "payload_nt": self.payload_nt,
            "epsilon": self.epsilon,
            "candidate": self.candidate.label,
            "vl": None if self.decision is None else self.decision.to_dict(),
        }


def choose_code(bits: str, start: str, cfg: SystemConfig) -> CodeChoice:
    """Pick the scheme and the number of bits this strand carries.

    ``start`` is the nucleotide just before the payload. Bits beyond
    ``bits_used`` belong to the next strand.
    """
    h = pattern_histogram(bits)
    if h.total == 0:
        raise ValueError("cannot choose a code for an empty segment")
    allowed = tuple(s.doubled_pattern for s in cfg.xx_codes)
    xx = select_unbalanced(h, allowed)
    candidate = Scheme.for_pattern(xx)
    fallback = CodeChoice(candidate, len(bits), h.total + h.count(xx), candidate)
    if not cfg.two_bit_enabled:
        return fallback

    prefix = max_feasible_2bit_prefix(bits, start, cfg.homo_max_run)
    if prefix == len(bits):
        return CodeChoice(Scheme.TWO_BIT, prefix, prefix // 2, candidate)
    if prefix == 0 or not cfg.variable_length:
        return fallback
    decision = evaluate_vl(len(bits), len(bits) - prefix, xx_density(xx, h), TWO_BIT_DENSITY, cfg.l_meta)
    if decision.take_high_density:
        return CodeChoice(Scheme.TWO_BIT, prefix, prefix // 2, candidate, decision)
    return CodeChoice(fallback.scheme, fallback.bits_used, fallback.payload_nt, candidate, decision)
