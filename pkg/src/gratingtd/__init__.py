"""Time-domain scattering by one-dimensional periodic gratings with exact DtN boundary conditions."""

__version__ = "0.1.0"
