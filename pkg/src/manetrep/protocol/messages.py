"""Wire-level message types.

Every packet is 512 bytes on the wire, whatever it carries.  The 4-bit code
table is fixed:

====  ======================
code  meaning
====  ======================
0     DATA
1     ACK
2     HELLO
3     HELLO_ACK
4     RREQ
5     RREP
6     HELLO_ENQ
7     HELLO_REPLY
8     ALLEGATION_LINK
9     ALLEGATION_DELAY
10    ALLEGATION_FLOOD
11    ALLEGATION_COLLUSION
12    COLLUSION_REQ
13    BICAST_COPY_RETURN
14    DEPARTURE_NOTICE
====  ======================
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Any, Optional

from ..net.encoding import NodeAttributes

PACKET_BYTES = 512


class MsgCode(enum.IntEnum):
    DATA = 0
    ACK = 1
    HELLO = 2
    HELLO_ACK = 3
    RREQ = 4
    RREP = 5
    HELLO_ENQ = 6
    HELLO_REPLY = 7
    ALLEGATION_LINK = 8
    ALLEGATION_DELAY = 9
    ALLEGATION_FLOOD = 10
    ALLEGATION_COLLUSION = 11
    COLLUSION_REQ = 12
    BICAST_COPY_RETURN = 13
    DEPARTURE_NOTICE = 14


class MaskingError(RuntimeError):
    """Raised on any attempt to build a message outside an originator."""


_STAMP = object()


@dataclass(frozen=True)
class Message:
    code: MsgCode
    origin_id: int
    timestamp: float
    msg_id: int
    payload: Any = None
    sender_attrs: Optional[NodeAttributes] = None
    _stamp: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self._stamp is not _STAMP:
            raise MaskingError("messages can only be created through an Originator")
        if not 0 <= int(self.code) <= 14:
            raise ValueError(f"message code {self.code} outside 0..14")

    @property
    def wire_bytes(self) -> int:
        return PACKET_BYTES


class Originator:
    """The only way to create messages; bound to one node identity."""

    def __init__(self, node_id: int, ids: "itertools.count[int]") -> None:
        self.node_id = node_id
        self._ids = ids

    def create(
        self,
        code: MsgCode,
        clock: float,
        payload: Any = None,
        attrs: Optional[NodeAttributes] = None,
    ) -> Message:
        return Message(MsgCode(code), self.node_id, float(clock), next(self._ids), payload, attrs, _STAMP)


class OriginRegistry:
    """Hands out exactly one :class:`Originator` per node id."""

    def __init__(self) -> None:
        self._issued: set[int] = set()
        self._ids = itertools.count()

    def issue(self, node_id: int) -> Originator:
        if node_id in self._issued:
            raise MaskingError(f"originator for node {node_id} already issued")
        self._issued.add(node_id)
        return Originator(node_id, self._ids)


@dataclass(frozen=True)
class DataPayload:
    source: int
    destination: int
    path: tuple[int, ...]


@dataclass(frozen=True)
class ForwardCopy:
    """A router's retained copy of its own bicast forward."""

    msg_id: int
    forwarder: int
    predecessor: int
    t_forward: float
    queue_size: int


@dataclass(frozen=True)
class SentCopy:
    """The predecessor's own bicast copy (``reply1``)."""

    msg_id: int
    sender: int
    receiver: int
    t_send: float


@dataclass(frozen=True)
class RreqPayload:
    requester: int
    destination: int
