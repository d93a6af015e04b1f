"""Compiled kernels against the per-strand Python path."""

import random
import zlib

import numpy as np
import pytest

from dpdna import _engine
from dpdna.codes import Scheme
from dpdna.config import SystemConfig, parse_scheme_mask
from dpdna.errors import DecodeError
from dpdna.feasibility import RuleSet, corpus_report, score_strand
from dpdna.nucleotides import ALPHABET, PATTERNS, bytes_to_bits, gc_content, max_homopolymer_run
from dpdna.pipeline import encode_bits, encode_bits_reference, encode_bytes, parse_all
from dpdna.strand import WIRE_IDS, ecc_bits_length, ecc_fill, parse_strand, protected_message


def test_crc_matches_zlib():
    rnd = random.Random(1)
    for _ in range(300):
        data = bytes(rnd.randrange(256) for _ in range(rnd.randint(0, 64)))
        assert _engine.crc32(np.frombuffer(data, dtype=np.uint8)) == zlib.crc32(data)


def test_ecc_patterns_match_python():
    rnd = random.Random(2)
    r = SystemConfig().ecc_fraction
    for _ in range(300):
        n = rnd.randint(1, 80)
        pats = np.array([rnd.randrange(4) for _ in range(n)], dtype=np.uint8)
        scheme = rnd.choice([Scheme.TWO_BIT, Scheme.CODE00, Scheme.CODE11])
        index = rnd.randrange(1 << 32)
        bits = "".join(PATTERNS[v] for v in pats)
        n_ecc = _engine.ecc_pattern_count(n, r.numerator, r.denominator)
        assert 2 * n_ecc == ecc_bits_length(2 * n, r)
        out = np.empty(n_ecc + 20, dtype=np.uint8)
        _engine.ecc_patterns(index, int(WIRE_IDS[scheme], 2), pats, 0, n, n_ecc, out)
        expected = ecc_fill(protected_message(index, scheme, bits), 2 * n_ecc)
        assert "".join(PATTERNS[v] for v in out[:n_ecc]) == expected


def _biased_bits(rng, n, weights):
    return "".join(np.array(PATTERNS)[rng.choice(4, n, p=weights)])


CONFIGS = [
    SystemConfig(),
    SystemConfig(homo_max_run=3),
    SystemConfig(strand_cap_nt=100),
    SystemConfig(strand_cap_nt=300, homo_max_run=3),
    SystemConfig(enabled_schemes=parse_scheme_mask("dpac-only")),
    SystemConfig(enabled_schemes=parse_scheme_mask("11-only")),
    SystemConfig(variable_length=False, index_bits=16, ecc_overhead_ratio=0.25),
    SystemConfig(ecc_overhead_ratio=0.0, strand_cap_nt=700),
]


@pytest.mark.parametrize("cfg", CONFIGS, ids=range(len(CONFIGS)))
def test_bulk_encode_matches_reference(cfg):
    rng = np.random.default_rng(7)
    pieces = [
        _biased_bits(rng, 3000, [0.25, 0.25, 0.25, 0.25]),
        _biased_bits(rng, 3000, [0.1, 0.1, 0.1, 0.7]),
        _biased_bits(rng, 3000, [0.7, 0.1, 0.1, 0.1]),
        "0" * 2000,
        "1" * 2000,
        bytes_to_bits(b"the quick brown fox jumps over the lazy dog " * 20),
    ]
    bits = "".join(pieces) + "1"
    res = encode_bits(bits, cfg)
    assert res.strands == encode_bits_reference(bits, cfg)


def test_bulk_parse_matches_reference():
    cfg = SystemConfig()
    data = np.random.default_rng(3).integers(0, 256, 4000, dtype=np.uint8).tobytes()
    strands = encode_bytes(data, cfg).strands
    rnd = random.Random(8)
    mutated = []
    for s in strands:
        roll = rnd.random()
        i = rnd.randrange(len(s))
        if roll < 0.3:
            s = s[:i] + ALPHABET[(ALPHABET.index(s[i]) + rnd.randint(1, 3)) % 4] + s[i + 1:]
        elif roll < 0.4:
            s = s[:i] + s[i + 1:]
        elif roll < 0.5:
            s = s[:i] + rnd.choice(ALPHABET) + s[i:]
        elif roll < 0.52:
            s = s[:i] + "N" + s[i + 1:]
        mutated.append(s)
    parsed = parse_all(mutated, cfg)
    statuses = set()
    for k, s in enumerate(mutated):
        statuses.add(int(parsed.status[k]))
        try:
            rec = parse_strand(s, cfg)
        except DecodeError:
            assert not parsed.ok[k]
            continue
        assert parsed.ok[k]
        assert parsed.index[k] == rec.index
        assert parsed.scheme[k] == int(rec.scheme)
        assert parsed.payload_bits(k) == rec.payload_bits
        assert parsed.payload_nt[k] == rec.payload_nt
    assert _engine.OK in statuses and _engine.BAD_CHECKSUM in statuses


def test_strand_stats_match_python():
    rnd = random.Random(5)
    strands = ["".join(rnd.choice("ACGT" if j % 3 else "AACG") for _ in range(rnd.randint(1, 200))) for j in range(600)]
    strands += ["ACGTAC" + "TTT" + "GTACGT", "AAAAAAAA", "GGGGCCCC"]
    for rules in (RuleSet(), RuleSet(stem_min=4, loop_min=0), RuleSet(stem_min=13)):
        rep = corpus_report(strands, rules)
        scores = [score_strand(s, rules) for s in strands]
        assert rep.hairpin_strands == sum(sc.hairpin for sc in scores)
        assert rep.homopolymer_violations == sum(sc.homopolymer for sc in scores)
        assert rep.gc_violations == sum(sc.gc for sc in scores)
        assert rep.average_score == pytest.approx(np.mean([sc.score for sc in scores]))
        assert rep.mean_gc == pytest.approx(np.mean([gc_content(s) for s in strands]))
        assert rep.max_run == max(max_homopolymer_run(s) for s in strands)
