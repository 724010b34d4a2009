"""T/OTS operators on alternating link shadows.

linkshadows models prime reduced link shadows (4-regular, 3-edge-connected plane multigraphs) as
rotation systems and provides:

- Tangle turning (T) and ots-triangle turning (OTS)
- Group, ots-triangle and 2-region analysis
- A reduction of any prime reduced shadow to the (n,2) torus shadow, with verifiable traces
- Orbit enumeration of the torus shadow, checked against exhaustive generation

See README.md for the command-line tools.
"""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("tots-linkshadows")
except PackageNotFoundError:
    __version__ = "0.0.0"

__license__ = "MIT"

from .diagram_core import CanonicalCode, Diagram, build_diagram, canonical_code, torus_shadow
from .reduction_pipeline import ReductionPipeline, ReductionTrace, reduce_to_torus, verify_trace

__all__ = [
    "CanonicalCode",
    "Diagram",
    "ReductionPipeline",
    "ReductionTrace",
    "build_diagram",
    "canonical_code",
    "reduce_to_torus",
    "torus_shadow",
    "verify_trace",
]
