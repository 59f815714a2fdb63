"""Bit-exact 53-bit node attribute block.

Layout, most significant field first::

    node_id  13 bits   < 5000
    lat      11 bits   0..2000 m, 1 m steps
    long     10 bits   0..1000 m, 1 m steps
    radio     8 bits   0..250 m
    velocity  6 bits   0..50 m/s, 1 m/s steps
    hello     5 bits   HELLO interval in whole seconds, 0..29
"""

from __future__ import annotations

from dataclasses import dataclass

BLOCK_BITS = 53

# (name, width, inclusive maximum)
FIELDS = (
    ("node_id", 13, 4999),
    ("lat", 11, 2000),
    ("long", 10, 1000),
    ("radio_range", 8, 250),
    ("velocity", 6, 50),
    ("hello_interval", 5, 29),
)
assert sum(w for _, w, _ in FIELDS) == BLOCK_BITS


class EncodingError(ValueError):
    pass


@dataclass(frozen=True)
class NodeAttributes:
    node_id: int
    lat: float
    long: float
    radio_range: float
    velocity: float
    hello_interval: float
    processing_time: float = 0.05
    queue_size: int = 5


def encode_attributes(attrs: NodeAttributes) -> int:
    block = 0
    for name, width, maximum in FIELDS:
        raw = getattr(attrs, name)
        value = int(round(raw))
        if value < 0 or value > maximum:
            raise EncodingError(f"{name}={raw} outside 0..{maximum}")
        block = (block << width) | value
    return block


def decode_attributes(block: int, processing_time: float = 0.05, queue_size: int = 5) -> NodeAttributes:
    if block < 0 or block >> BLOCK_BITS:
        raise EncodingError("block wider than 53 bits")
    values = {}
    shift = BLOCK_BITS
    for name, width, _ in FIELDS:
        shift -= width
        values[name] = (block >> shift) & ((1 << width) - 1)
    return NodeAttributes(
        node_id=values["node_id"],
        lat=float(values["lat"]),
        long=float(values["long"]),
        radio_range=float(values["radio_range"]),
        velocity=float(values["velocity"]),
        hello_interval=float(values["hello_interval"]),
        processing_time=processing_time,
        queue_size=queue_size,
    )


def block_bits(block: int) -> str:
    """The block as a 53-character binary string."""
    return format(block, f"0{BLOCK_BITS}b")
