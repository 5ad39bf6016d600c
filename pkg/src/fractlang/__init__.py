"""Process terms, their trace semantics, and the fractals and measures they describe.

Modules:

- ``terms``: syntax, parsing, printing and substitution
- ``lts``: small-step semantics and finite transition systems
- ``traces``: trace sets and trace equivalence
- ``proofs``: derivation checking and random axiom rewriting
- ``fractal``: contraction interpretations and GIFS solutions
- ``measure``: exact trace measures, measure equivalence, sampling
- ``render``: PPM/PGM rasterization
- ``cli``: the ``fractlang`` command
"""

__version__ = "0.1.0"
