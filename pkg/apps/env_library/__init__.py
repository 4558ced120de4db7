"""
Environment Library App - per-robot polytope and SFI store, sync and merge
"""
