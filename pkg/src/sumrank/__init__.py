"""Exact combinatorics of tricolored sum-free sets in finite abelian groups.

The package has three layers:

* exact group arithmetic and dense tensors over prime fields
  (:mod:`sumrank.groups`, :mod:`sumrank.fftensor`),
* rank and instability certificates for 3-tensors, with an exhaustive
  small-case slice-rank oracle (:mod:`sumrank.slicerank`),
* the combinatorial pipeline: triple-product-property constructions,
  border sum-free sets and their powers, packing and omega diagnostics,
  and the large-deviation rate functions behind the size bounds
  (:mod:`sumrank.stpp`, :mod:`sumrank.sumfree`, :mod:`sumrank.rates`).

Everything that claims to be a certificate is bit-exactly checkable; all
counts and threshold comparisons are done in exact integer or rational
arithmetic, with floats confined to the rate-function values themselves.
"""

__version__ = "0.1.0"
