"""System configuration shared by the selector, strand format and pipeline."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction

from .codes import DPDNA_SCHEMES, Scheme
from .errors import ConfigError
from .nucleotides import ALPHABET, max_homopolymer_run

# Fixed 20-nt pair: GC 50%, longest run 2, no 6-nt stem hairpin alone or joined
# to a payload. Chosen once by search and pinned by tests.
DEFAULT_PRIMER_FORWARD = "GACGCTGTCTGAGACTAGAA"
DEFAULT_PRIMER_REVERSE = "TGAGAAGCCGTGCGTATCAA"

CONFIG_ENV_VAR = "DPDNA_CONFIG"

SCHEME_MASKS = {
    "all": frozenset(DPDNA_SCHEMES),
    "dpac-only": frozenset(s for s in DPDNA_SCHEMES if s is not Scheme.TWO_BIT),
    "11-only": frozenset({Scheme.CODE11}),
}
_MASK_TOKENS = {
    "2bit": Scheme.TWO_BIT,
    "00": Scheme.CODE00,
    "01": Scheme.CODE01,
    "10": Scheme.CODE10,
    "11": Scheme.CODE11,
}


def parse_scheme_mask(mask: str) -> frozenset[Scheme]:
    """``'all'``, ``'dpac-only'``, ``'11-only'`` or a comma list such as ``'2bit,00,11'``."""
    if mask in SCHEME_MASKS:
        return SCHEME_MASKS[mask]
    try:
        return frozenset(_MASK_TOKENS[tok.strip()] for tok in mask.split(",") if tok.strip())
    except KeyError as exc:
        raise ConfigError(f"unknown scheme in mask {mask!r}: {exc.args[0]}") from None


@dataclass(frozen=True)
class SystemConfig:
    strand_cap_nt: int = 150
    homo_max_run: int = 2
    primer_forward: str = DEFAULT_PRIMER_FORWARD
    primer_reverse: str = DEFAULT_PRIMER_REVERSE
    index_bits: int = 32
    ecc_overhead_ratio: float = 0.15
    segment_bits: int | None = None
    enabled_schemes: frozenset[Scheme] = field(default_factory=lambda: SCHEME_MASKS["all"])
    variable_length: bool = True

    def __post_init__(self):
        if self.homo_max_run not in (2, 3):
            raise ConfigError(f"homo_max_run must be 2 or 3, got {self.homo_max_run}")
        for name in ("primer_forward", "primer_reverse"):
            p = getattr(self, name)
            if not p or set(p) - set(ALPHABET):
                raise ConfigError(f"{name} must be a non-empty A/C/G/T string")
            if max_homopolymer_run(p) > 3:
                raise ConfigError(f"{name} contains a homopolymer longer than 3")
        if max_homopolymer_run(self.primer_reverse[:3]) > 2:
            raise ConfigError("primer_reverse must not start with a run longer than 2")
        if self.index_bits % 2 or not 2 <= self.index_bits <= 64:
            raise ConfigError("index_bits must be even and in [2, 64]")
        if not 0 <= self.ecc_overhead_ratio < 1:
            raise ConfigError("ecc_overhead_ratio must be in [0, 1)")
        if self.segment_bits is not None and (self.segment_bits < 2 or self.segment_bits % 2):
            raise ConfigError("segment_bits must be even and >= 2")
        schemes = frozenset(Scheme(s) for s in self.enabled_schemes)
        object.__setattr__(self, "enabled_schemes", schemes)
        if not schemes <= set(DPDNA_SCHEMES):
            raise ConfigError("only DP-DNA schemes can be enabled")
        if not self.xx_codes:
            raise ConfigError("at least one xx-code must stay enabled as fallback")
        if self.strand_cap_nt < self.min_strand_nt:
            raise ConfigError(
                f"strand_cap_nt={self.strand_cap_nt} cannot hold a one-pattern strand"
                f" (needs {self.min_strand_nt} nt in the worst case)"
            )

    @property
    def primer_nt(self) -> int:
        return len(self.primer_forward) + len(self.primer_reverse)

    @property
    def header_bits(self) -> int:
        return 4 + self.index_bits

    @property
    def l_meta(self) -> int:
        """Nominal metadata nt: primers, 2-nt Encoding field, index at 2 bits/nt."""
        return self.primer_nt + 2 + (self.index_bits + 1) // 2

    @property
    def min_strand_nt(self) -> int:
        # worst-case 11-code header, one doubled payload pattern, one doubled ECC pattern
        return self.primer_nt + 2 + self.index_bits + 2 + 2

    @property
    def ecc_fraction(self) -> Fraction:
        return Fraction(str(self.ecc_overhead_ratio))

    @property
    def two_bit_enabled(self) -> bool:
        return Scheme.TWO_BIT in self.enabled_schemes

    @property
    def xx_codes(self) -> tuple[Scheme, ...]:
        return tuple(s for s in self.enabled_schemes if s is not Scheme.TWO_BIT)

    def with_(self, **changes) -> SystemConfig:
        return replace(self, **changes)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["enabled_schemes"] = sorted(s.label for s in self.enabled_schemes)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> SystemConfig:
        d = dict(d)
        if "enabled_schemes" in d:
            by_label = {s.label: s for s in DPDNA_SCHEMES}
            try:
                d["enabled_schemes"] = frozenset(by_label[x] for x in d["enabled_schemes"])
            except KeyError as exc:
                raise ConfigError(f"unknown scheme {exc.args[0]!r}") from None
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_env(cls) -> SystemConfig:
        """Defaults, overridden by the JSON file named in ``$DPDNA_CONFIG`` if set."""
        path = os.environ.get(CONFIG_ENV_VAR)
        if not path:
            return cls()
        try:
            with open(path) as fh:
                return cls.from_dict(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
