"""Symbolic-numeric toolkit for conservative and Poisson vector fields."""
