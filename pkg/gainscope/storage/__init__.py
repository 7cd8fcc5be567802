"""
gainscope - Storage Layer (Layer 0)

Deterministic output files with checksums.
"""
from .files import OutputStorage, OutputRef, content_hash, format_real

__all__ = [
    "OutputStorage",
    "OutputRef",
    "content_hash",
    "format_real",
]
