"""Verification toolkit for parametric reactive and linear hybrid
systems: hierarchical reduction to ground linear arithmetic, weakest
universal parameter constraints by symbol elimination, and iterative
invariant strengthening."""

__version__ = "0.1.0"
