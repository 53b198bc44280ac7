"""Joint sweep-trajectory and power planning for a stratospheric SAR platform."""

__version__ = "0.1.0"
