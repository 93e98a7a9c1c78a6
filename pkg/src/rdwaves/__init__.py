"""Exact solution families for nonlinear reaction-diffusion equations.

Construction of elliptic-chain, plane-wave, solitary-wave and Fisher-type
exact solutions, with independent numerical verification (PDE residuals with
convergence-order estimates) and direct simulation (method of lines with
front-velocity measurement).
"""

__version__ = "0.1.0"
