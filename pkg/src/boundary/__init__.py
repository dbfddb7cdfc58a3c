# Boundary Physics Package
