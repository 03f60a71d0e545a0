"""Fixed-topology recurrent networks: forward pass, mutation, serialization.

A network is a stack of fully connected layers ``input -> hidden... ->
output``. Exactly one hidden layer is recurrent and uses ``tanh``; every
other layer (including the output layer) uses ReLU. Clipping of outputs is
left to the consumer.

Parameters live in one flat float64 vector. For every layer, in order, the
layout is ``W`` (``out x in``, row-major), then ``U`` (``out x out``,
recurrent layer only), then ``b`` (``out``).
"""

from __future__ import annotations

import itertools
import math
import struct
from dataclasses import dataclass, field

import numpy as np
from numba import njit

__all__ = [
    "NetTopology",
    "Genome",
    "HiddenState",
    "param_count",
    "zero_genome",
    "forward",
    "mutate",
    "genome_to_bytes",
    "genome_from_bytes",
]

_lineage = itertools.count()

# largest double below 1; keeps post-tanh state strictly inside (-1, 1)
_TANH_CAP = math.nextafter(1.0, 0.0)


@dataclass(frozen=True)
class NetTopology:
    """Layer sizes of a network with a single recurrent hidden layer.

    ``recurrent_layer_index`` indexes ``hidden_dims``.
    """

    input_dim: int
    hidden_dims: tuple
    output_dim: int
    recurrent_layer_index: int | None

    def __post_init__(self):
        object.__setattr__(self, "hidden_dims", tuple(int(h) for h in self.hidden_dims))
        dims = (self.input_dim, *self.hidden_dims, self.output_dim)
        if any(int(d) != d or d < 1 for d in dims):
            raise ValueError(f"all layer dimensions must be positive integers, got {dims}")
        if not self.hidden_dims:
            raise ValueError("topology requires at least one hidden layer")
        rec = self.recurrent_layer_index
        if rec is None or not 0 <= rec < len(self.hidden_dims):
            raise ValueError("topology requires exactly one recurrent hidden layer")

    @property
    def sizes(self) -> tuple:
        return (self.input_dim, *self.hidden_dims, self.output_dim)

    @property
    def state_dim(self) -> int:
        return self.hidden_dims[self.recurrent_layer_index]

    @classmethod
    def paper(cls, input_dim: int, output_dim: int) -> "NetTopology":
        """``(input_dim, 50, 50, output_dim)`` with the last hidden layer recurrent."""
        return cls(input_dim, (50, 50), output_dim, 1)


def param_count(topology: NetTopology) -> int:
    sizes = topology.sizes
    total = 0
    for layer in range(len(sizes) - 1):
        n_in, n_out = sizes[layer], sizes[layer + 1]
        total += n_in * n_out + n_out
        if layer == topology.recurrent_layer_index:
            total += n_out * n_out
    return total


@dataclass(frozen=True, eq=False)
class Genome:
    topology: NetTopology
    params: np.ndarray
    lineage_id: int = field(default_factory=lambda: next(_lineage))

    def __post_init__(self):
        params = np.array(self.params, dtype=np.float64)
        if params.shape != (param_count(self.topology),):
            raise ValueError(
                f"expected {param_count(self.topology)} parameters, got shape {params.shape}"
            )
        if not np.all(np.isfinite(params)):
            raise ValueError("genome parameters must be finite")
        params.flags.writeable = False
        object.__setattr__(self, "params", params)

    def __len__(self) -> int:
        return self.params.shape[0]


@dataclass(frozen=True)
class HiddenState:
    values: np.ndarray

    @classmethod
    def zeros(cls, topology: NetTopology) -> "HiddenState":
        return cls(np.zeros(topology.state_dim))


def zero_genome(topology: NetTopology) -> Genome:
    return Genome(topology, np.zeros(param_count(topology)))


@njit(cache=True, nogil=True)
def forward_kernel(params, sizes, rec, x, h):
    """One time step. Returns ``(output, new_hidden)``; ``h`` is not modified."""
    offset = 0
    cur = x
    new_h = h
    n_layers = sizes.shape[0] - 1
    for layer in range(n_layers):
        n_in = sizes[layer]
        n_out = sizes[layer + 1]
        w_off = offset
        offset += n_in * n_out
        u_off = offset
        if layer == rec:
            offset += n_out * n_out
        b_off = offset
        offset += n_out
        nxt = np.empty(n_out)
        for j in range(n_out):
            acc = 0.0
            row = w_off + j * n_in
            for i in range(n_in):
                acc += params[row + i] * cur[i]
            if layer == rec:
                row = u_off + j * n_out
                for k in range(n_out):
                    acc += params[row + k] * h[k]
            acc += params[b_off + j]
            if layer == rec:
                v = math.tanh(acc)
                if v > _TANH_CAP:
                    v = _TANH_CAP
                elif v < -_TANH_CAP:
                    v = -_TANH_CAP
                nxt[j] = v
            else:
                nxt[j] = acc if acc > 0.0 else 0.0
        if layer == rec:
            new_h = nxt
        cur = nxt
    return cur, new_h


def _sizes_array(topology: NetTopology) -> np.ndarray:
    return np.array(topology.sizes, dtype=np.int64)


def forward(genome: Genome, x, state: HiddenState) -> tuple[np.ndarray, HiddenState]:
    """Pure single-step forward pass."""
    topo = genome.topology
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (topo.input_dim,):
        raise ValueError(f"input must have shape ({topo.input_dim},), got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("input must be finite")
    h = np.asarray(state.values, dtype=np.float64)
    if h.shape != (topo.state_dim,):
        raise ValueError(f"hidden state must have shape ({topo.state_dim},), got {h.shape}")
    out, new_h = forward_kernel(genome.params, _sizes_array(topo), topo.recurrent_layer_index, x, h)
    return out, HiddenState(new_h)


def mutate(genome: Genome, seed: int, sigma: float) -> Genome:
    """Add i.i.d. ``N(0, sigma**2)`` noise to every parameter.

    The result depends only on ``(genome, seed, sigma)``.
    """
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    rng = np.random.default_rng(int(seed) & 0xFFFFFFFFFFFFFFFF)
    noise = rng.standard_normal(genome.params.shape[0])
    return Genome(genome.topology, genome.params + sigma * noise)


def genome_to_bytes(genome: Genome) -> bytes:
    """Topology header (little-endian uint32) followed by float64 parameters.

    Header fields: input_dim, number of hidden layers, each hidden size,
    output_dim, recurrent_layer_index.
    """
    t = genome.topology
    header = [t.input_dim, len(t.hidden_dims), *t.hidden_dims, t.output_dim, t.recurrent_layer_index]
    return struct.pack(f"<{len(header)}I", *header) + genome.params.astype("<f8").tobytes()


def genome_from_bytes(buf: bytes, offset: int = 0) -> tuple[Genome, int]:
    """Inverse of :func:`genome_to_bytes`; returns ``(genome, next_offset)``."""
    input_dim, n_hidden = struct.unpack_from("<2I", buf, offset)
    offset += 8
    hidden = struct.unpack_from(f"<{n_hidden}I", buf, offset)
    offset += 4 * n_hidden
    output_dim, rec = struct.unpack_from("<2I", buf, offset)
    offset += 8
    topo = NetTopology(input_dim, hidden, output_dim, rec)
    n = param_count(topo)
    if len(buf) < offset + 8 * n:
        raise ValueError("truncated genome payload")
    params = np.frombuffer(buf, dtype="<f8", count=n, offset=offset).astype(np.float64)
    return Genome(topo, params), offset + 8 * n
