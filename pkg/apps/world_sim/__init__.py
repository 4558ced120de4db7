"""
World Simulation App - voxel world, robots, sensing rays, comm graph and clock
"""
