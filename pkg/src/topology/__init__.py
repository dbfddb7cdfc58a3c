# Topology Package
