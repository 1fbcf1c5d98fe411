"""Følner densities, normality along subsets, block complexity and tile-entropy
for symbolic functions on countable amenable groups."""

__version__ = "0.1.0"
