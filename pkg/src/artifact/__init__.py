"""Exact modular-symbol computations for adjoint motives of modular forms: Hecke
eigensystems, local types, Sigma-variation, congruence ideals, adjoint L-values and
local double-coset algebra."""

__version__ = "0.1.0"
