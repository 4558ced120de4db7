"""
Frontier SFI App - frontier meshes, clusters, viewpoints and super viewpoints
"""
