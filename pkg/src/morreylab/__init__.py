"""Numerical laboratory for grand Morrey norms and potential operators on finite spaces."""

from __future__ import annotations

__version__ = "0.1.0"
