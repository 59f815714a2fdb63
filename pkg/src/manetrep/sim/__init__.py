"""Event-driven world in which every node runs the protocol."""
