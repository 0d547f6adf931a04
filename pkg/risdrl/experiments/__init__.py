"""
Experiment runners and their command-line surface.
"""

from .runner import eval_checkpoint, run_complexity, run_convergence, run_rate_vs_elements

__all__ = ["eval_checkpoint", "run_complexity", "run_convergence", "run_rate_vs_elements"]
