# z2chain - Z2 invariants of symmetric 1D insulators
# This file makes the src directory into a Python package

"""
z2chain: Berry phases, parallel transport and edge states of tight-binding chains

Architecture Layers:
- ui/       : Command line, report writers and the self test
- topology/ : Winding numbers, parallel transport, Bloch frames and the invariant
- boundary/ : Truncated chains and their zero-energy end states
- bands/    : Models, the Jacobi eigensolver, spectral projections, built-in chains
- core/     : Error hierarchy and numerical settings
"""
