"""Geometry, mobility, beaconing, the event clock and the attribute codec."""
