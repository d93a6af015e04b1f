"""Synthesis/sequencing design-rule checks and corpus scoring.

A strand scores one point per violated rule: a homopolymer of 4 or more, GC
content outside 40-60%, a hairpin (a stem followed, after a loop of at
least three nucleotides, by its reverse complement), or a length above
1000 nt.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from . import _engine
from .nucleotides import gc_content, max_homopolymer_run, reverse_complement, seq_to_array

# k-mer tables above this stem length get too large; fall back to the dict scan
_KERNEL_STEM_MAX = 12


@dataclass(frozen=True)
class RuleSet:
    homopolymer_max: int = 3
    gc_low: float = 0.40
    gc_high: float = 0.60
    stem_min: int = 6
    loop_min: int = 3
    length_max: int = 1000

    def __post_init__(self):
        if min(self.homopolymer_max, self.stem_min, self.length_max) <= 0 or self.loop_min < 0:
            raise ValueError("rule thresholds must be positive")
        if not 0 <= self.gc_low < self.gc_high <= 1:
            raise ValueError("need 0 <= gc_low < gc_high <= 1")


@dataclass(frozen=True)
class StrandScore:
    homopolymer: bool
    gc: bool
    hairpin: bool
    length: bool

    @property
    def score(self) -> int:
        return self.homopolymer + self.gc + self.hairpin + self.length


def detect_hairpin(seq: str, stem_min: int = 6, loop_min: int = 3) -> bool:
    """True if some ``stem_min``-mer's reverse complement appears at least ``loop_min`` nt after it.

    A longer stem always contains a qualifying ``stem_min``-mer pair, so only
    that length is scanned.
    """
    if len(seq) < 2 * stem_min + loop_min:
        return False
    first: dict[str, int] = {}
    for j in range(len(seq) - stem_min + 1):
        kmer = seq[j:j + stem_min]
        first.setdefault(kmer, j)
        i = first.get(reverse_complement(kmer))
        if i is not None and i + stem_min + loop_min <= j:
            return True
    return False


def score_strand(seq: str, rules: RuleSet = RuleSet()) -> StrandScore:
    gc = gc_content(seq) if seq else 0.0
    return StrandScore(
        homopolymer=max_homopolymer_run(seq) > rules.homopolymer_max,
        gc=not rules.gc_low <= gc <= rules.gc_high,
        hairpin=detect_hairpin(seq, rules.stem_min, rules.loop_min),
        length=len(seq) > rules.length_max,
    )


@dataclass
class FeasibilityReport:
    strand_count: int
    mean_gc: float
    homopolymer_violations: int
    length_violations: int
    gc_violations: int
    hairpin_strands: int
    max_run: int
    max_length: int
    average_score: float

    @property
    def hairpin_ratio(self) -> float:
        return self.hairpin_strands / self.strand_count

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hairpin_ratio"] = self.hairpin_ratio
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    def to_table(self) -> str:
        rows = [
            ("GC content (Ave.)", f"{100 * self.mean_gc:.2f}%"),
            ("long homopolymer violation", "Yes" if self.homopolymer_violations else "No"),
            ("Long DNA strand length", "Yes" if self.length_violations else "No"),
            ("Hairpin structure ratio", f"{self.hairpin_ratio:.4f}"),
            ("Average score per strand", f"{self.average_score:.4f}"),
            ("Strands", str(self.strand_count)),
        ]
        width = max(len(r[0]) for r in rows)
        return "\n".join(f"{name:<{width}}  {value}" for name, value in rows)


def corpus_report(strands: Sequence[str], rules: RuleSet = RuleSet()) -> FeasibilityReport:
    if not strands:
        raise ValueError("empty corpus")
    lengths = np.fromiter((len(s) for s in strands), dtype=np.int64, count=len(strands))
    if (lengths == 0).any():
        raise ValueError("empty strand in corpus")
    offsets = np.concatenate(([0], np.cumsum(lengths[:-1])))
    nts = seq_to_array("".join(strands))
    if (nts > 3).any():
        raise ValueError("corpus contains non-ACGT characters")
    n = len(strands)
    gc, run, hairpin = np.empty(n), np.empty(n, np.int64), np.empty(n, np.bool_)
    stem = min(rules.stem_min, _KERNEL_STEM_MAX)
    _engine.strand_stats(nts, offsets, lengths, stem, rules.loop_min, gc, run, hairpin)
    if rules.stem_min > _KERNEL_STEM_MAX:
        hairpin[:] = [detect_hairpin(s, rules.stem_min, rules.loop_min) for s in strands]
    homo_v = run > rules.homopolymer_max
    gc_v = (gc < rules.gc_low) | (gc > rules.gc_high)
    len_v = lengths > rules.length_max
    scores = homo_v.astype(int) + gc_v + hairpin + len_v
    return FeasibilityReport(
        strand_count=n,
        mean_gc=float(gc.mean()),
        homopolymer_violations=int(homo_v.sum()),
        length_violations=int(len_v.sum()),
        gc_violations=int(gc_v.sum()),
        hairpin_strands=int(hairpin.sum()),
        max_run=int(run.max()),
        max_length=int(lengths.max()),
        average_score=float(scores.mean()),
    )
