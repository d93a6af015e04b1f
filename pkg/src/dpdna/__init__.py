"""Pattern-aware multi-code DNA storage codec.

Binary data is cut into segments; each segment is written as one DNA strand
using whichever of five rotating codes (the 2bit-code or one of four
unbalanced xx-codes) gives the best density while keeping homopolymer runs
short. Every strand decodes on its own.
"""

from .codes import (
    RotatingTable,
    Scheme,
    blawat_density,
    church_decode,
    church_encode,
    goldman_decode,
    goldman_encode,
    two_bit_decode,
    two_bit_encode,
    xx_decode,
    xx_density,
    xx_encode,
)
from .config import SystemConfig
from .dpac import CodeChoice, VlDecision, choose_code, evaluate_vl, max_feasible_2bit_prefix, select_unbalanced
from .errors import (
    CapacityError,
    ChecksumMismatch,
    ConfigError,
    DecodeError,
    DpDnaError,
    IntegrityError,
    ManifestMismatch,
    PrimerMismatch,
    UnknownScheme,
)
from .feasibility import FeasibilityReport, RuleSet, corpus_report, detect_hairpin, score_strand
from .nucleotides import (
    PatternHistogram,
    complement,
    gc_content,
    max_homopolymer_run,
    pattern_histogram,
    reverse_complement,
)
from .pipeline import (
    DensityReport,
    Manifest,
    baseline_compare,
    decode_strands,
    density_report,
    encode_bits,
    encode_bytes,
    encode_file,
    inject_errors,
    length_sweep,
    segment_bits,
)
from .strand import StrandRecord, assemble_strand, ecc_fill, ecc_verify, encode_scheme_field, parse_strand

__version__ = "0.1.0"
