"""Command-line interface: encode, decode, analyze, check, bench, sweep.

Exit codes: 0 success, 2 I/O failure, 3 bad arguments/config/manifest,
4 data integrity (damaged or missing strands, malformed strand file).
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
import tempfile
from pathlib import Path

from .config import SystemConfig, parse_scheme_mask
from .errors import CapacityError, ConfigError, DecodeError, IntegrityError, ManifestMismatch
from .feasibility import corpus_report
from .pipeline import (
    Manifest,
    baseline_compare,
    breakdown,
    decode_strands,
    density_report,
    encode_bytes,
    length_sweep,
    parse_all,
    pattern_ratio_table,
    segment_bits,
)
from .strand import read_fasta, write_fasta

EXIT_OK, EXIT_IO, EXIT_CONFIG, EXIT_INTEGRITY = 0, 2, 3, 4
DEFAULT_CAPS = (100, 150, 300, 700)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


# --- helpers -----------------------------------------------------------------


def _atomic_write(path: Path, content: str | bytes) -> None:
    """Write to a temp file in the target directory, then rename over ``path``."""
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb" if isinstance(content, bytes) else "w") as fh:
            fh.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_primers(path: str) -> tuple[str, str]:
    """Two sequences, one per line; FASTA-style '>' lines and blanks are skipped."""
    with open(path) as fh:
        seqs = [ln.strip().upper() for ln in fh if ln.strip() and not ln.startswith(">")]
    if len(seqs) != 2:
        raise ConfigError(f"{path}: expected exactly two primer sequences, found {len(seqs)}")
    return seqs[0], seqs[1]


def build_config(args) -> SystemConfig:
    cfg = SystemConfig.from_env()
    changes = {}
    if args.cap is not None:
        changes["strand_cap_nt"] = args.cap
    if args.homo is not None:
        changes["homo_max_run"] = args.homo
    if args.index_bits is not None:
        changes["index_bits"] = args.index_bits
    if args.ecc_ratio is not None:
        changes["ecc_overhead_ratio"] = args.ecc_ratio
    if args.scheme_mask is not None:
        changes["enabled_schemes"] = parse_scheme_mask(args.scheme_mask)
    if args.primers is not None:
        changes["primer_forward"], changes["primer_reverse"] = _read_primers(args.primers)
    return cfg.with_(**changes) if changes else cfg


def _read_strands(path: str) -> list[tuple[str, str]]:
    with open(path) as fh:
        return read_fasta(fh)


def _table(header: list[str], rows: list[list]) -> str:
    cells = [header] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _emit(args, payload: dict, table: str) -> None:
    if args.format == "json":
        print(json.dumps(payload, indent=1, sort_keys=True))
    else:
        print(table)


def _read_input(path: str) -> bytes:
    with open(path, "rb") as fh:
        return fh.read()


# --- commands ----------------------------------------------------------------


def cmd_encode(args, cfg: SystemConfig) -> int:
    data = _read_input(args.input)
    prefix = Path(args.output) if args.output else Path(args.input).with_suffix("")
    res = encode_bytes(data, cfg, name=Path(args.input).name, audit=args.audit)
    res.manifest.seed = args.seed
    fasta_path = prefix.with_name(prefix.name + ".fasta")
    manifest_path = prefix.with_name(prefix.name + ".manifest.json")
    buf = io.StringIO()
    write_fasta(buf, zip(res.headers, res.strands))
    _atomic_write(fasta_path, buf.getvalue())
    _atomic_write(manifest_path, res.manifest.to_json() + "\n")
    if args.audit:
        audit_path = prefix.with_name(prefix.name + ".audit.jsonl")
        _atomic_write(audit_path, "".join(json.dumps(r, sort_keys=True) + "\n" for r in res.audit))
    if args.format == "fasta":
        sys.stdout.write(buf.getvalue())
        return EXIT_OK
    if res.strands:
        rep = density_report(res.strands, res.manifest)
        summary = rep.to_dict()
    else:
        rep, summary = None, {"payload_bits": 0, "strand_count": 0}
    summary.update(fasta=str(fasta_path), manifest=str(manifest_path))
    line = f"encoded {args.input}: {len(res.strands)} strands, {8 * len(data)} bits"
    if rep:
        line += f", payload {rep.payload_density:.4f} bits/nt, overall {rep.overall_density:.4f} bits/nt"
    line += f" -> {fasta_path}, {manifest_path}"
    _emit(args, summary, line)
    return EXIT_OK


def _header_index(header: str) -> int | None:
    head = header.split("|", 1)[0].strip()
    return int(head) if head.isdigit() else None


def cmd_decode(args, cfg: SystemConfig) -> int:
    try:
        manifest = Manifest.from_json(Path(args.manifest).read_text())
        manifest.cfg  # validate the snapshot before touching strands
    except ConfigError as exc:
        raise ManifestMismatch(f"manifest config is invalid: {exc}") from exc
    entries = _read_strands(args.fasta)
    strands = [seq.upper() for _, seq in entries]
    try:
        data = decode_strands(strands, manifest)
    except IntegrityError as exc:
        parsed = parse_all(strands, manifest.cfg)
        bad = [k for k in range(len(strands)) if not parsed.ok[k]]
        if not bad:
            raise
        lines = []
        for k in bad:
            idx = int(parsed.index[k])
            if idx < 0:
                idx = _header_index(entries[k][0])
            where = f"index {idx}" if idx is not None else "index unknown"
            lines.append(f"strand {where} (record {k + 1}): {parsed.error_text(k)}")
        raise CliError(f"{len(bad)} damaged strand(s):\n" + "\n".join(lines), EXIT_INTEGRITY) from exc
    out = Path(args.output) if args.output else Path(args.fasta).with_suffix(".decoded")
    _atomic_write(out, data)
    _emit(
        args,
        {"output": str(out), "bytes": len(data), "strands": len(strands)},
        f"decoded {len(strands)} strands -> {out} ({len(data)} bytes)",
    )
    return EXIT_OK


def cmd_analyze(args, cfg: SystemConfig) -> int:
    data = _read_input(args.input)
    if not data:
        raise ConfigError("cannot analyze an empty file")
    table = pattern_ratio_table(data, segment_bits(cfg))
    pats = list(table["histogram"])
    rows = [["overall"] + [f"{100 * table['overall'][p]:.1f}%" for p in pats]]
    for b, (lo, hi) in enumerate(table["bins"]):
        label = f"[{lo:g}, {hi:g}" + ("]" if b == len(table["bins"]) - 1 else ")")
        rows.append([label] + [f"{100 * table['histogram'][p][b]:.1f}%" for p in pats])
    text = _table(["pattern ratio"] + [f"'{p}'" for p in pats], rows)
    text += f"\n{table['segments']} segments of {table['segment_bits']} bits"
    _emit(args, table, text)
    return EXIT_OK


def cmd_check(args, cfg: SystemConfig) -> int:
    entries = _read_strands(args.fasta)
    if not entries:
        raise ConfigError(f"{args.fasta}: no strands to check")
    seqs = [seq.upper() for _, seq in entries]
    try:
        rep = corpus_report(seqs)
    except ValueError as exc:
        raise DecodeError(str(exc)) from exc
    _emit(args, rep.to_dict(), rep.to_table())
    return EXIT_OK


def cmd_bench(args, cfg: SystemConfig) -> int:
    data = _read_input(args.input)
    if not data:
        raise ConfigError("cannot benchmark an empty file")
    reports = baseline_compare(data, cfg)
    steps = breakdown(data, cfg)
    rows = [[r.scheme, f"{r.payload_density:.4f}", f"{r.overall_density:.4f}", r.strand_count] for r in reports]
    text = _table(["scheme", "payload bits/nt", "overall bits/nt", "strands"], rows)
    text += "\n\n" + _table(
        ["step", "payload bits/nt", "overall bits/nt"],
        [[r.scheme, f"{r.payload_density:.4f}", f"{r.overall_density:.4f}"] for r in steps],
    )
    _emit(args, {"baselines": [r.to_dict() for r in reports], "breakdown": [r.to_dict() for r in steps]}, text)
    return EXIT_OK


def _parse_caps(values: list[str]) -> list[int]:
    caps = []
    for v in values:
        for tok in v.split(","):
            if tok.strip():
                try:
                    caps.append(int(tok))
                except ValueError:
                    raise ConfigError(f"invalid cap {tok!r}") from None
    return caps or list(DEFAULT_CAPS)


def cmd_sweep(args, cfg: SystemConfig) -> int:
    caps = _parse_caps(args.caps)
    for cap in caps:
        cfg.with_(strand_cap_nt=cap)  # reject bad caps before reading input
    data = _read_input(args.input)
    if not data:
        raise ConfigError("cannot sweep an empty file")
    results = length_sweep(data, caps, cfg)
    rows = [[cap, f"{r.payload_density:.4f}", f"{r.overall_density:.4f}", r.strand_count] for cap, r in results]
    text = _table(["cap nt", "payload bits/nt", "overall bits/nt", "strands"], rows)
    _emit(args, {"sweep": [dict(cap=cap, **r.to_dict()) for cap, r in results]}, text)
    return EXIT_OK


# --- entry point -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--cap", type=int, help="maximum strand length in nt (default 150)")
    common.add_argument("--homo", type=int, choices=(2, 3), help="longest homopolymer allowed in the 2bit-code check")
    common.add_argument("--primers", metavar="FILE", help="file with the forward and reverse primer, one per line")
    common.add_argument("--index-bits", type=int, help="width of the strand index field")
    common.add_argument("--ecc-ratio", type=float, help="ECC bits per payload bit")
    common.add_argument("--scheme-mask", help="'all', 'dpac-only', '11-only' or a list like '2bit,00,11'")
    common.add_argument("--seed", type=int, default=20240521, help="seed recorded in the manifest")
    common.add_argument("--audit", action="store_true", help="write per-strand selection decisions as JSON lines")
    common.add_argument("--format", choices=("json", "table", "fasta"), default="table")

    parser = _Parser(prog="dpdna", description="Pattern-aware DNA storage encoder.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("encode", parents=[common], help="encode a file into strands and a manifest")
    p.add_argument("input")
    p.add_argument("-o", "--output", help="output prefix (default: input path without extension)")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", parents=[common], help="rebuild a file from strands and its manifest")
    p.add_argument("fasta")
    p.add_argument("manifest")
    p.add_argument("-o", "--output", help="output file (default: <fasta>.decoded)")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("analyze", parents=[common], help="per-segment 2-bit pattern ratio histogram")
    p.add_argument("input")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("check", parents=[common], help="design-rule report for a strand file")
    p.add_argument("fasta")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("bench", parents=[common], help="compare densities against the baselines")
    p.add_argument("input")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("sweep", parents=[common], help="densities across strand length caps")
    p.add_argument("input")
    p.add_argument("caps", nargs="*", help="caps in nt, space or comma separated (default 100 150 300 700)")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = build_config(args)
        return args.func(args, cfg)
    except CliError as exc:
        print(f"dpdna: {exc}", file=sys.stderr)
        return exc.code
    except (ConfigError, ManifestMismatch, CapacityError) as exc:
        print(f"dpdna: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrityError as exc:
        print(f"dpdna: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY
    except DecodeError as exc:
        print(f"dpdna: malformed strand data: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY
    except OSError as exc:
        print(f"dpdna: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
