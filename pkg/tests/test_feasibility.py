import json
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dpdna.feasibility import RuleSet, corpus_report, detect_hairpin, score_strand
from dpdna.nucleotides import reverse_complement


def hairpin_oracle(s, stem_min=6, loop_min=3):
    n = len(s)
    for i in range(n):
        for length in range(stem_min, n - i + 1):
            rc = reverse_complement(s[i:i + length])
            for j in range(i + length + loop_min, n - length + 1):
                if s[j:j + length] == rc:
                    return True
    return False


def test_hairpin_examples():
    assert detect_hairpin("ACGTAC" + "TTT" + "GTACGT")
    assert not detect_hairpin("ACGTAC" + "TT" + "GTACGT")
    assert not detect_hairpin("A" * 500)
    assert not detect_hairpin("ACGTAC" + "GTACG")


def test_hairpin_matches_oracle():
    rnd = random.Random(17)
    for trial in range(3000):
        n = rnd.randint(0, 64)
        alphabet = "ACGT" if trial % 2 else rnd.choice(["AT", "CG", "ACGT", "AGT"])
        s = "".join(rnd.choice(alphabet) for _ in range(n))
        stem = rnd.choice([3, 4, 6])
        loop = rnd.choice([0, 3, 5])
        assert detect_hairpin(s, stem, loop) == hairpin_oracle(s, stem, loop), (s, stem, loop)


def test_score_gc_and_run_example():
    # 300 nt, 63% GC, one run of five A; stem 12 keeps the random body hairpin-free
    rnd = random.Random(0)
    while True:
        body = list("GC" * 94 + "G" + "AT" * 53)
        rnd.shuffle(body)
        s = "".join(body) + "AAAAA"
        if max_run_below(s[:-5], 4) and not detect_hairpin(s, 12):
            break
    assert len(s) == 300 and s.count("G") + s.count("C") == 189
    sc = score_strand(s, RuleSet(stem_min=12))
    assert (sc.homopolymer, sc.gc, sc.hairpin, sc.length) == (True, True, False, False)
    assert sc.score == 2


def max_run_below(s, limit):
    return all(s[i:i + limit] != s[i] * limit for i in range(len(s)))


def test_score_acgt_repeat():
    s = "ACGT" * 50
    sc = score_strand(s)
    assert not sc.homopolymer and not sc.gc and not sc.length
    # ACGTAC's reverse complement GTACGT recurs ten nt later
    assert sc.hairpin == hairpin_oracle(s[:40]) is True


def test_length_rule():
    assert score_strand("ACGT" * 300).length
    assert not score_strand("ACGT" * 250).length


def test_corpus_report():
    clean = "GACGCTGTCTGAGACTAGAA"
    rep = corpus_report([clean] * 5)
    assert rep.average_score == 0 and rep.hairpin_ratio == 0
    assert rep.mean_gc == pytest.approx(0.5)
    rep = corpus_report([clean, "AAAAAAAAAA", "ACGTAC" + "TTT" + "GTACGT"])
    assert rep.homopolymer_violations == 1
    assert rep.hairpin_ratio == pytest.approx(1 / 3)
    d = json.loads(rep.to_json())
    assert d["hairpin_ratio"] == pytest.approx(1 / 3)
    table = rep.to_table()
    for row in ("GC content (Ave.)", "long homopolymer violation", "Hairpin structure ratio", "Average score per strand"):
        assert row in table
    with pytest.raises(ValueError):
        corpus_report([])
    with pytest.raises(ValueError):
        corpus_report(["ACGN"])


def test_ruleset_validation():
    with pytest.raises(ValueError):
        RuleSet(stem_min=0)
    with pytest.raises(ValueError):
        RuleSet(gc_low=0.7, gc_high=0.6)


@given(st.text(alphabet="ACGT", max_size=120))
def test_hairpin_is_rc_symmetric(s):
    assert detect_hairpin(s) == detect_hairpin(reverse_complement(s))
