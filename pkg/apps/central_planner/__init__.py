"""
Central Planner App - motion costs, meeting strategies and rendezvous routing
"""
