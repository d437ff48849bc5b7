"""Packet-level simulation of edge-sampling marking on a single attack path.

Routers sit at distances ``n, n-1, ..., 1`` from the victim (distance 0).  A
packet leaves the attacker unmarked and passes the routers in that order.
Each router, with probability ``p``, overwrites the mark with
``start=<itself>, end=None, distance=0``.  A router that does not overwrite a
marked packet fills in ``end`` if it is still empty and increments
``distance``.  The victim completes a pending ``end`` with itself, so a mark
written at distance ``i`` arrives as edge ``(i, i-1)`` with counter ``i - 1``.
The victim files it as coupon ``i`` (counter + 1).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .alias import AliasTable
from .attack_model import PathParameters, build_distribution
from .simulators import TrialSample, _draw_chunk_size, run_trials

__all__ = [
    "PacketMark",
    "ReconstructionState",
    "transmit_packet",
    "transmit_packets",
    "run_reconstruction",
    "simulate_packet_level",
]

UNMARKED = 0


@dataclass(frozen=True)
class PacketMark:
    marked: bool = False
    start_router: int | None = None
    end_router: int | None = None
    distance: int | None = None

    @property
    def edge(self) -> int:
        """Coupon index carried by the packet; 0 when unmarked."""
        return self.distance + 1 if self.marked else UNMARKED


@dataclass
class ReconstructionState:
    n: int
    collected: set = field(default_factory=set)
    packets_processed: int = 0

    @property
    def complete(self) -> bool:
        return len(self.collected) == self.n

    def receive(self, mark: PacketMark) -> bool:
        self.packets_processed += 1
        if mark.marked:
            if mark.end_router != mark.start_router - 1 or not 0 <= mark.distance < self.n:
                raise ValueError(f"inconsistent mark {mark}")
            self.collected.add(mark.edge)
        return self.complete

    def absorb(self, edges) -> bool:
        """Receive a batch of coupon indices in arrival order.

        Stops counting at the packet that completes the path; the rest of the
        batch is discarded.
        """
        if self.complete:
            return True
        edges = np.asarray(edges)
        types, first = np.unique(edges, return_index=True)
        real = types != UNMARKED
        types, first = types[real], first[real]
        fresh = np.array([t not in self.collected for t in types.tolist()], dtype=bool)
        self.collected.update(types[fresh].tolist())
        if self.complete:
            self.packets_processed += int(first[fresh].max()) + 1
            return True
        self.packets_processed += edges.size
        return False


def transmit_packet(params: PathParameters, rng: np.random.Generator) -> PacketMark:
    """Send one packet down the path, executing each router's decision in turn."""
    p = params.p
    start = end = distance = None
    for router in range(params.n, 0, -1):
        if rng.random() < p:
            start, end, distance = router, None, 0
        elif start is not None:
            if end is None:
                end = router
            distance += 1
    if start is None:
        return PacketMark()
    if end is None:
        end = 0
    return PacketMark(True, start, end, distance)


def transmit_packets(params: PathParameters, rng: np.random.Generator, size: int):
    """Vectorized ``transmit_packet`` over a batch.

    Returns ``(marked, start, end, distance)`` arrays; fields of unmarked
    packets are -1.  Routers are still visited one at a time, attacker side
    first, so override and counter semantics are executed literally.
    """
    p = params.p
    start = np.full(size, -1, dtype=np.int64)
    end = np.full(size, -1, dtype=np.int64)
    distance = np.full(size, -1, dtype=np.int64)
    for router in range(params.n, 0, -1):
        marks = rng.random(size) < p
        carry = ~marks & (start >= 0)
        end[carry & (end < 0)] = router
        distance[carry] += 1
        start[marks] = router
        end[marks] = -1
        distance[marks] = 0
    marked = start >= 0
    end[marked & (end < 0)] = 0
    return marked, start, end, distance


def _faithful_batch(params: PathParameters, size: int):
    def draw(rng):
        marked, _, _, distance = transmit_packets(params, rng, size)
        return np.where(marked, distance + 1, UNMARKED)

    return draw


@dataclass
class _PacketContext:
    params: PathParameters
    mode: str
    chunk: int
    table: AliasTable | None = None


def _draw_fn(ctx: _PacketContext):
    if ctx.mode == "fast":
        return lambda rng: ctx.table.sample(rng, ctx.chunk)
    return _faithful_batch(ctx.params, ctx.chunk)


def _context(params: PathParameters, mode: str, batch: int | None) -> _PacketContext:
    if mode not in ("faithful", "fast"):
        raise ValueError(f"mode must be 'faithful' or 'fast', got {mode!r}")
    dist = build_distribution(params)
    if not np.all(dist.rates > 0):
        raise ValueError("some edge can never be marked; reconstruction never completes")
    chunk = batch or _draw_chunk_size(dist)
    if mode == "faithful":
        # a faithful batch costs n router passes; keep it cache-sized
        chunk = batch or min(chunk, max(64, (1 << 20) // params.n))
    table = AliasTable(dist.probabilities) if mode == "fast" else None
    return _PacketContext(params, mode, chunk, table)


def _reconstruction_trial(ctx: _PacketContext, rng) -> int:
    state = ReconstructionState(ctx.params.n)
    draw = _draw_fn(ctx)
    while not state.absorb(draw(rng)):
        pass
    return state.packets_processed


def run_reconstruction(params: PathParameters, rng: np.random.Generator, mode: str = "faithful",
                       batch: int | None = None) -> int:
    """Packets the victim receives until every edge of the path has been seen.

    ``mode="faithful"`` routes every packet through every router (O(n) per
    packet); ``mode="fast"`` draws the surviving mark straight from the coupon
    distribution.
    """
    return _reconstruction_trial(_context(params, mode, batch), rng)


def simulate_packet_level(params: PathParameters, M: int, seed: int = 0, workers=1,
                          mode: str = "faithful", batch: int | None = None) -> TrialSample:
    ctx = _context(params, mode, batch)
    values = run_trials(_reconstruction_trial, ctx, M, seed, workers, np.int64)
    return TrialSample("packet-level", params.n, params.lam, values, seed)
