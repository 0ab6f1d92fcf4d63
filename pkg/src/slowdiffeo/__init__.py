"""Volume-preserving skew products over circle rotations with slow derivative growth."""

__version__ = "0.1.0"
