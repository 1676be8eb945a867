"""Global-extremum certificates for dispersion bands of periodic graph operators."""

from .certify import Certificate, SearchConfig, Verdict, certify, find_critical_point, run_pipeline
from .dispersion import band_at, derivative_pack
from .hermitian import Inertia, inertia
from .lattice import BlochFamily, PeriodicGraphSpec, build_bloch_family, load_family

__version__ = "0.1.0"

__all__ = [
    "BlochFamily", "Certificate", "Inertia", "PeriodicGraphSpec", "SearchConfig", "Verdict",
    "band_at", "build_bloch_family", "certify", "derivative_pack", "find_critical_point",
    "inertia", "load_family", "run_pipeline",
]
