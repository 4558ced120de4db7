"""
Core App - shared exceptions and exploration configuration
"""
