"""Decision procedures and verified certificates for products of odometers."""

__version__ = "0.1.0"
