"""
Benchmark Harness App - full runs, baselines, metrics and persisted results
"""
