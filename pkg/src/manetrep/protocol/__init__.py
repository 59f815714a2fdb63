"""Message types and the detection procedures built on them."""
