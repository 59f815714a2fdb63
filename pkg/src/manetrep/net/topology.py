"""Directed disc-model neighbourhoods and the shortest-path route oracle."""

from __future__ import annotations

from collections import deque
from typing import Iterable, Sequence

import numpy as np


def reach_matrix(positions: np.ndarray, ranges: np.ndarray) -> np.ndarray:
    """``R[i, j]`` is True when ``j`` lies strictly inside ``i``'s radio range."""
    diff = positions[:, None, :] - positions[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=-1))
    reach = dist < ranges[:, None]
    np.fill_diagonal(reach, False)
    return reach


def directed_neighbors(i: int, positions: np.ndarray, ranges: np.ndarray) -> tuple[set[int], set[int]]:
    """Downlink set N(i) and uplink set U(i) = {j : i in N(j)}."""
    reach = reach_matrix(np.asarray(positions, float), np.asarray(ranges, float))
    down = {int(j) for j in np.flatnonzero(reach[i])}
    up = {int(j) for j in np.flatnonzero(reach[:, i])}
    return down, up


def adjacency(reach: np.ndarray) -> list[list[int]]:
    return [np.flatnonzero(row).tolist() for row in reach]


def shortest_path(
    adj: Sequence[Sequence[int]],
    src: int,
    dst: int,
    exclude: Iterable[int] = (),
    max_hops: int | None = None,
) -> list[int] | None:
    """BFS path ``[src, ..., dst]``; lowest node ids win ties."""
    if src == dst:
        return [src]
    banned = set(exclude)
    if src in banned or dst in banned:
        return None
    prev = {src: -1}
    depth = {src: 0}
    q = deque([src])
    while q:
        u = q.popleft()
        if max_hops is not None and depth[u] >= max_hops:
            continue
        for v in adj[u]:
            if v in prev or v in banned:
                continue
            prev[v] = u
            depth[v] = depth[u] + 1
            if v == dst:
                path = [v]
                while prev[path[-1]] != -1:
                    path.append(prev[path[-1]])
                return path[::-1]
            q.append(v)
    return None


def hop_distances(adj: Sequence[Sequence[int]], src: int) -> dict[int, int]:
    depth = {src: 0}
    q = deque([src])
    while q:
        u = q.popleft()
        for v in adj[u]:
            if v not in depth:
                depth[v] = depth[u] + 1
                q.append(v)
    return depth
