"""SO(2)-equivariant degree tools for Neumann problems -Lap u = f(u) on symmetric domains."""

__version__ = "0.1.0"
