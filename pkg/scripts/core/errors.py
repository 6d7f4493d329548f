"""
errors.py - Exception hierarchy for pifmhd

This module handles:
- A single base class so CLIs can catch every solver failure at once
- Builtin mix-ins (ValueError, RuntimeError, FloatingPointError) so callers
  that only know the builtins still catch the right thing
- Positivity failures that carry the offending cell, time and state
"""

from __future__ import annotations

from typing import Optional, Tuple


class PifMhdError(Exception):
    """Base class for every error raised by the library."""


class InvalidGridError(PifMhdError, ValueError):
    """Degenerate bounds, zero extents or mismatched field shapes."""


class DegenerateStateError(PifMhdError, ValueError):
    """A state the EOS, wave speeds or eigensystem cannot handle."""


class ConfigError(PifMhdError, ValueError):
    """Invalid run configuration or config file."""


class PositivityError(PifMhdError, RuntimeError):
    """Negative (or below-floor) density or pressure in an updated state.

    Args:
        message: Human readable summary
        cell: Interior cell index of the first offending cell
        time: Simulation time at the start of the failing step
        step: Step number
        rho: Density at the cell
        pressure: Pressure at the cell
    """

    def __init__(self, message: str, cell: Optional[Tuple[int, ...]] = None,
                 time: Optional[float] = None, step: Optional[int] = None,
                 rho: Optional[float] = None, pressure: Optional[float] = None):
        self.message = message
        self.cell = cell
        self.time = time
        self.step = step
        self.rho = rho
        self.pressure = pressure
        details = []
        if cell is not None:
            details.append(f"cell={cell}")
        if step is not None:
            details.append(f"step={step}")
        if time is not None:
            details.append(f"t={time:.6g}")
        if rho is not None:
            details.append(f"rho={rho:.6g}")
        if pressure is not None:
            details.append(f"p={pressure:.6g}")
        super().__init__(message + (f" ({', '.join(details)})" if details else ""))

    def located(self, time: float, step: int) -> "PositivityError":
        """Return a copy of this error stamped with the driver's time and step."""
        return type(self)(self.message, cell=self.cell, time=time,
                          step=step, rho=self.rho, pressure=self.pressure)


class PositivityFloorError(PositivityError):
    """The Lax-Friedrichs update (or a limiter precondition) broke the floors."""


class NonFiniteStateError(PifMhdError, FloatingPointError):
    """NaN or Inf detected after a step."""
