"""
Mission Protocol App - meetings, host aggregation and mission lifecycle
"""
