"""HTTP service wrapping the solver package."""

from .app import app, handle_bench, handle_cycles, handle_omega_sweep, handle_solve

__all__ = ["app", "handle_bench", "handle_cycles", "handle_omega_sweep", "handle_solve"]
