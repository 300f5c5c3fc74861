"""
Adapters for external SMT solvers.
"""
