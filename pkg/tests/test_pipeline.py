import math
import random

import numpy as np
import pytest

from dpdna.codes import Scheme
from dpdna.config import SystemConfig, parse_scheme_mask
from dpdna.errors import ConfigError, IntegrityError, ManifestMismatch
from dpdna.feasibility import corpus_report
from dpdna.nucleotides import ALPHABET, max_homopolymer_run
from dpdna.pipeline import (
    Manifest,
    baseline_compare,
    breakdown,
    decode_strands,
    decode_to_bits,
    density_report,
    encode_bits,
    encode_bytes,
    encode_file,
    inject_errors,
    length_sweep,
    pattern_ratio_table,
    segment_bits,
)


@pytest.fixture(scope="module")
def random_kb():
    return np.random.default_rng(42).integers(0, 256, 20_000, dtype=np.uint8).tobytes()


def test_segment_bits():
    assert segment_bits(SystemConfig()) == 128
    assert segment_bits(SystemConfig(strand_cap_nt=300)) == 336
    assert segment_bits(SystemConfig(segment_bits=64)) == 64
    for L, cap in ((128, 150), (336, 300)):
        assert 1.15 * 0.625 * L <= cap - 58 < 1.15 * 0.625 * (L + 2)
    with pytest.raises(ConfigError):
        SystemConfig(strand_cap_nt=59)


def test_empty_input():
    res = encode_bytes(b"")
    assert res.strands == [] and res.manifest.bit_length == 0
    assert decode_strands([], res.manifest) == b""


def test_all_zeros_uses_two_bit():
    res = encode_bytes(bytes(1024))
    assert set(res.manifest.schemes) == {str(int(Scheme.TWO_BIT))}
    assert density_report(res.strands, res.manifest).payload_density == 2.0


def test_all_ones_uses_code00():
    res = encode_bytes(b"\xff" * 1024, SystemConfig(homo_max_run=3))
    assert set(res.manifest.schemes) == {str(int(Scheme.CODE00))}
    assert density_report(res.strands, res.manifest).payload_density == 2.0


@pytest.mark.parametrize("x", [2, 3])
@pytest.mark.parametrize("cap", [100, 150, 300, 700])
def test_round_trip_configs(random_kb, x, cap):
    cfg = SystemConfig(homo_max_run=x, strand_cap_nt=cap)
    data = random_kb + b"plain text " * 300 + bytes(500)
    res = encode_bytes(data, cfg)
    assert decode_strands(res.strands, res.manifest) == data
    assert all(len(s) <= cap for s in res.strands)
    assert max(max_homopolymer_run(s) for s in res.strands) <= 3
    assert sum(res.manifest.bits_used) == 8 * len(data)


def test_odd_bit_input():
    bits = "1011001"
    res = encode_bits(bits)
    assert res.manifest.padded_bits == 1
    assert decode_to_bits(res.strands, res.manifest) == bits


def test_shuffled_strands(random_kb):
    res = encode_bytes(random_kb)
    strands = list(res.strands)
    random.Random(1).shuffle(strands)
    assert decode_strands(strands, res.manifest) == random_kb


def test_missing_and_duplicate_strands(random_kb):
    res = encode_bytes(random_kb)
    with pytest.raises(IntegrityError) as exc:
        decode_strands(res.strands[:5] + res.strands[6:], res.manifest)
    assert exc.value.indices == [5]
    assert "5" in str(exc.value)
    with pytest.raises(IntegrityError):
        decode_strands(res.strands + [res.strands[3]], res.manifest)


def test_damaged_strand_reported(random_kb):
    res = encode_bytes(random_kb)
    strands = list(res.strands)
    s = strands[7]
    strands[7] = s[:60] + ALPHABET[(ALPHABET.index(s[60]) + 2) % 4] + s[61:]
    with pytest.raises(IntegrityError) as exc:
        decode_strands(strands, res.manifest)
    assert exc.value.indices == [7]


def test_manifest_mismatch(random_kb):
    res = encode_bytes(random_kb)
    other = encode_bytes(random_kb[:2000])
    with pytest.raises(ManifestMismatch):
        decode_strands(res.strands, other.manifest)
    foreign = encode_bytes(random_kb, SystemConfig(primer_forward="ACGTACGTACGTACGTACGA"))
    with pytest.raises(ManifestMismatch):
        decode_strands(foreign.strands, res.manifest)
    with pytest.raises(ManifestMismatch):
        Manifest.from_json("{not json")
    with pytest.raises(ManifestMismatch):
        Manifest.from_json('{"format_version": 99}')


def test_manifest_json_round_trip(random_kb):
    res = encode_bytes(random_kb, name="x.bin")
    back = Manifest.from_json(res.manifest.to_json())
    assert back == res.manifest
    assert back.cfg == SystemConfig()
    assert back.strand_count == len(res.strands) == len(back.bits_used)


def test_encode_file(tmp_path, random_kb):
    path = tmp_path / "f.bin"
    path.write_bytes(random_kb)
    res = encode_file(path)
    assert decode_strands(res.strands, res.manifest) == random_kb
    assert res.manifest.name == str(path)


def test_determinism(random_kb):
    a, b = encode_bytes(random_kb), encode_bytes(random_kb)
    assert a.strands == b.strands and a.manifest.to_json() == b.manifest.to_json()


def test_audit_rows(random_kb):
    res = encode_bytes(random_kb[:3000], audit=True)
    assert len(res.audit) == len(res.strands)
    for row, code in zip(res.audit, res.manifest.schemes):
        assert row["scheme"] == Scheme(int(code)).label
        assert row["bits_used"] <= row["segment_bits"]
    assert encode_bytes(random_kb[:3000]).audit is None


def test_density_report_invariants(random_kb):
    res = encode_bytes(random_kb)
    rep = density_report(res.strands, res.manifest)
    assert rep.overall_density < rep.payload_density <= 2.0
    assert sum(rep.scheme_usage.values()) == len(res.strands)
    assert rep.total_nt == sum(map(len, res.strands))
    with pytest.raises(ValueError):
        density_report([], res.manifest)


def test_dpac_only_random_density():
    data = np.random.default_rng(1).integers(0, 256, 1 << 20, dtype=np.uint8).tobytes()
    cfg = SystemConfig(enabled_schemes=parse_scheme_mask("dpac-only"))
    res = encode_bytes(data, cfg)
    rep = density_report(res.strands, res.manifest)
    assert 1.60 <= rep.payload_density <= 1.70
    assert Scheme.TWO_BIT.label not in rep.scheme_usage


def test_baselines(random_kb):
    reports = {r.scheme: r for r in baseline_compare(random_kb)}
    assert reports["Church"].payload_density == 1.0
    assert reports["Blawat"].payload_density == 1.6
    assert abs(reports["Goldman"].payload_density - 1.5754) < 0.01
    h2, h3 = reports["DP-DNA(Homo-2)"], reports["DP-DNA(Homo-3)"]
    assert h3.payload_density >= h2.payload_density >= 1.6
    for r in reports.values():
        assert r.overall_density < r.payload_density
    with pytest.raises(ValueError):
        baseline_compare(b"")


def test_baseline_overall_accounting():
    # 2400 bits at 1 bit/nt, cap 150: per strand 150 - 40 - 32 = 78 nt room, 67 payload nt
    church = baseline_compare(bytes(300))[0]
    per = math.floor(78 / 1.15)
    full, rest = divmod(2400, per)
    ecc = full * math.ceil(0.15 * per) + math.ceil(0.15 * rest)
    strands = full + 1
    assert church.total_nt == 2400 + ecc + strands * 72
    assert church.strand_count == strands


def test_breakdown_steps(random_kb):
    labels = [r.scheme for r in breakdown(random_kb)]
    assert labels == ["+11-code", "++DPAC", "+++2bit", "++++VL"]


def test_length_sweep_single_cap(random_kb):
    [(cap, rep)] = length_sweep(random_kb, [150])
    res = encode_bytes(random_kb)
    direct = density_report(res.strands, res.manifest)
    assert cap == 150
    assert (rep.payload_density, rep.overall_density) == (direct.payload_density, direct.overall_density)


def test_inject_errors():
    strands = ["".join(random.Random(i).choice(ALPHABET) for _ in range(1000)) for i in range(100)]
    assert inject_errors(strands) == strands
    noisy = inject_errors(strands, sub_rate=0.008, seed=3)
    subs = sum(a != b for s, t in zip(strands, noisy) for a, b in zip(s, t))
    sigma = math.sqrt(1e5 * 0.008 * 0.992)
    assert abs(subs - 800) <= 3 * sigma
    assert noisy == inject_errors(strands, sub_rate=0.008, seed=3)
    indel = inject_errors(strands, ins_rate=0.01, del_rate=0.01, seed=4)
    assert any(len(a) != len(b) for a, b in zip(strands, indel))
    with pytest.raises(ValueError):
        inject_errors(strands, sub_rate=1.5)


def test_single_strand_damage_is_local(random_kb):
    res = encode_bytes(random_kb)
    k = 11
    noisy = list(res.strands)
    noisy[k] = inject_errors([noisy[k]], sub_rate=0.05, seed=9)[0]
    with pytest.raises(IntegrityError) as exc:
        decode_strands(noisy, res.manifest)
    assert exc.value.indices == [k]


def test_pattern_ratio_table():
    table = pattern_ratio_table(b"\x00" * 75 + b"\xff" * 75, 300)
    assert table["segments"] == 4
    assert table["histogram"]["00"][-1] == 0.5
    assert table["histogram"]["11"][0] == 0.5
    assert sum(table["histogram"]["01"]) == pytest.approx(1.0)
    short = pattern_ratio_table(b"\x1b", 300)
    assert short["segments"] == 1 and short["segment_bits"] == 8
    assert all(short["overall"][p] == 0.25 for p in ("00", "01", "10", "11"))


def test_pipeline_output_is_feasible(random_kb):
    res = encode_bytes(random_kb + b"abc" * 2000)
    rep = corpus_report(res.strands)
    assert rep.homopolymer_violations == 0 and rep.length_violations == 0
    assert abs(rep.mean_gc - 0.5) < 0.02
