# Core Package (errors and numerical settings)
