"""Certified evaluation of the Bergman kernel of the punctured Poincare disk."""
__version__ = "0.1.0"
