"""
Local Planner App - deadline-budgeted replanning during lonely exploration
"""
