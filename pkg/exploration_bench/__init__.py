"""
exploration_bench main module
"""
