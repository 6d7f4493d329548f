"""
Core module - Numerical library for pifmhd

This module contains the solver organized by concern:
- mesh: grids, fields, boundary fills, stencil helpers
- physics: ideal-MHD state algebra and eigensystem
- weno: WENO5 kernels and characteristic interface reconstruction
- pif: time-averaged fluxes and the conservative update
- ct: magnetic potential evolution and curl correction
- limiter: positivity-preserving flux limiter
- problems: initial-condition catalog
- diagnostics: error norms, orders, monitors
- driver: run configuration, time loop, output
"""
