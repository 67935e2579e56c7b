"""Toolkit for para-Kaehler Einstein spaces with three-dimensional symmetry algebras.

Modules: ``jets`` (truncated bivariate Taylor arithmetic), ``quartic_weyl``
(Weyl quartic invariants and type), ``ode_engine`` (adaptive integration with
dense output and events), ``symmetry_cases`` (reduced equations and the
explicit example), ``geometry`` (metrics, curvature and Killing checks),
``pipelines`` and ``cli``.
"""
from ._accel import backend

__version__ = "0.1.0"

__all__ = ["backend", "__version__"]
