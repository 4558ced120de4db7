"""
Star-Convex App - free-space polytopes from sensor frames
"""
