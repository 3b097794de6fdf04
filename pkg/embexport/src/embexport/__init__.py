"""Embedding export artifacts for the surprisim scoring toolkit.

Embeds a corpus with a chosen backend and writes the document embeddings,
gold labels, and templated label-query embeddings as strict JSONL files,
together with a manifest recording exactly what produced them.
"""

__version__ = "0.1.0"

from .errors import DataError, ExportError, UnavailableError, UsageError
from .export import DEFAULT_TEMPLATE, ExportJob, run_export

__all__ = [
    "DEFAULT_TEMPLATE",
    "DataError",
    "ExportError",
    "ExportJob",
    "UnavailableError",
    "UsageError",
    "__version__",
    "run_export",
]
