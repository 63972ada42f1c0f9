"""
Monte Carlo experiments
Each experiment is independent, reproducible from (config, master seed) and testable
"""
