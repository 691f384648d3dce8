"""Numerical laboratory for classical integrable many-body systems.

Submodules group by system family: rational Calogero-Moser (calogero),
trigonometric BC_n Sutherland and its rational dual (sutherland), the
Ruijsenaars-type deformation of the latter (deformed), the hyperbolic
van Diejen system (van_diejen), and the compactified Ruijsenaars-Schneider
systems on complex projective space (compact_rs).  Shared kernels live in
special, linalg and dynamics; the cli module drives experiments and the
invariant-check battery.
"""

__version__ = "0.1.0"
