"""Consistency checking for share purchase agreements.

Pipeline: ``.spa`` text -> blocks -> ContractModel -> assertions -> solver
-> report. See :mod:`contractcheck.cli` for the command-line interface.
"""

from .analyze import Analysis, AnalysisReport, ClaimVerdict, Verdict, render_report, run_analysis
from .blocks import BlockDocument, BlockSyntaxError, parse_blocks, serialize_blocks, validate_blocks
from .encode import encode_consequence, encode_limitation, encode_performability, encode_spa
from .model import ContractModel, build_model

__all__ = [
    "Analysis",
    "AnalysisReport",
    "BlockDocument",
    "BlockSyntaxError",
    "ClaimVerdict",
    "ContractModel",
    "Verdict",
    "build_model",
    "encode_consequence",
    "encode_limitation",
    "encode_performability",
    "encode_spa",
    "parse_blocks",
    "render_report",
    "run_analysis",
    "serialize_blocks",
    "validate_blocks",
]
