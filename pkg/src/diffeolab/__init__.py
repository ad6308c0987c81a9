"""Exact computations on diffeological vector spaces and pseudo-bundles.

Modules: ``pwpoly`` (piecewise polynomial plots), ``dvs`` (spaces, duals,
forms, membership), ``bundle`` (pseudo-bundles, fibres, gluing),
``metric`` (pseudo-metrics) and ``dsl`` (documents and the CLI).
"""

__version__ = "0.1.0"
