"""oscex - Exact discretizations of harmonic oscillators and a stepper benchmark CLI."""

__version__ = "0.1.0"
