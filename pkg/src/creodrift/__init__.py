"""Language drift and community divergence through persistent homology."""

__version__ = "0.1.0"
