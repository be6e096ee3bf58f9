"""borelweyl: exact skew-Laurent models for symmetrizable Borel presentations.

The package builds generalized Weyl algebras bound by a generalized Cartan
matrix inside skew Laurent polynomial models, and machine-checks, over exact
coefficient fields, which presentation relations survive the passage into
the model, producing honest residuals when they do not.
"""

__version__ = "0.1.0"
