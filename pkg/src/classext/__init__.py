"""Class groups of ring extensions: exact lattices, rings, invertible modules and class groups."""

__version__ = "0.1.0"
