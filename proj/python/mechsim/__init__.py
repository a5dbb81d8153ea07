"""Mechanism construction, correlated-equilibrium verification and
regret-matching simulation over finite environments."""

from ._mechsim import *  # noqa: F401,F403

__version__ = "0.1.0"
