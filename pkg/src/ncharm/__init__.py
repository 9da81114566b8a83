"""Numerical harmonic analysis on noncommutative groups.

Submodules: ``nclp`` (traced algebras and noncommutative L^p norms), ``finite``
(finite groups), ``heisenberg``, ``axb`` (the ax+b group), ``freegrp`` (free
groups) and ``spherical`` (SL_2(R)).
"""
from __future__ import annotations

__version__ = "0.1.0"

from ._errors import Refusal

__all__ = ["Refusal", "__version__"]
