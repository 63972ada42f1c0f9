"""
Unit tests for the clique memory simulator

Run with: pytest tests/
Skip the long Monte Carlo runs with: pytest -m "not slow"
"""
