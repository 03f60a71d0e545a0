"""Binary checkpoint format.

Layout (little-endian)::

    b"GANECKPT"            magic
    uint32                 format version
    uint64                 payload length
    32 bytes               SHA-256 of the payload
    payload:
        uint32 + bytes     JSON metadata (sorted keys, compact)
        RunningStats       count uint64, dim uint32, mean f64[dim], m2 f64[dim]
        uint32 + genomes   generator population
        uint32 + genomes   discriminator population
        uint32 + entries   captured elites: RunningStats then genome

Genomes use :func:`gane.net.genome_to_bytes`. The metadata holds the run
configuration (without the output location), the generation counter, the
seed ledger and the metric history. Nothing time-dependent is stored, so
two identical runs produce identical payloads. The payload digest is also
written to a ``.sha256`` sidecar next to the file.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path

from ..coevo import Population, RunState
from ..envs import get_spec
from ..net import genome_from_bytes, genome_to_bytes
from ..standardize import RunningStats
from .config import RunConfig

__all__ = ["Checkpoint", "CheckpointError", "FORMAT_VERSION", "save_checkpoint", "load_checkpoint",
           "payload_digest"]

MAGIC = b"GANECKPT"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<8sIQ32s")


class CheckpointError(RuntimeError):
    pass


@dataclass
class Checkpoint:
    """A run state plus the bookkeeping needed to continue and report on it."""

    config: RunConfig
    state: RunState
    ledger: dict = field(default_factory=dict)
    history: dict = field(default_factory=dict)
    elites: list = field(default_factory=list)  # (generation, elite_index, stats, genome)


def _pack_population(members) -> bytes:
    return struct.pack("<I", len(members)) + b"".join(genome_to_bytes(g) for g in members)


def _unpack_population(buf, offset):
    (n,) = struct.unpack_from("<I", buf, offset)
    offset += 4
    members = []
    for _ in range(n):
        g, offset = genome_from_bytes(buf, offset)
        members.append(g)
    return members, offset


def encode_payload(ckpt: Checkpoint) -> bytes:
    st = ckpt.state
    meta = {
        "config": ckpt.config.payload_dict(),
        "generation": st.generation,
        "elite_indices": list(st.elite_indices) if st.elite_indices is not None else None,
        "ledger": ckpt.ledger,
        "history": ckpt.history,
        "elite_captures": [[gen, idx] for gen, idx, _, _ in ckpt.elites],
    }
    blob = json.dumps(meta, sort_keys=True, separators=(",", ":"), allow_nan=False).encode()
    parts = [struct.pack("<I", len(blob)), blob, st.stats.to_bytes(),
             _pack_population(st.generators.members), _pack_population(st.discriminators.members),
             struct.pack("<I", len(ckpt.elites))]
    for _, _, stats, genome in ckpt.elites:
        parts.append(stats.to_bytes())
        parts.append(genome_to_bytes(genome))
    return b"".join(parts)


def payload_digest(payload: bytes) -> str:
    return hashlib.sha256(payload).hexdigest()


def save_checkpoint(ckpt: Checkpoint, path) -> str:
    """Atomically write ``path`` and its ``.sha256`` sidecar; returns the digest."""
    path = Path(path)
    payload = encode_payload(ckpt)
    digest = hashlib.sha256(payload).digest()
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION, len(payload), digest))
        fh.write(payload)
    os.replace(tmp, path)
    Path(str(path) + ".sha256").write_text(digest.hex() + "\n")
    return digest.hex()


def load_checkpoint(path, output_dir=None) -> Checkpoint:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from None
    if len(raw) < _HEADER.size:
        raise CheckpointError(f"{path} is too short to be a checkpoint")
    magic, version, length, digest = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise CheckpointError(f"{path} is not a checkpoint file")
    if version != FORMAT_VERSION:
        raise CheckpointError(
            f"checkpoint format version {version} is not supported (this build reads version {FORMAT_VERSION})"
        )
    payload = raw[_HEADER.size:]
    if len(payload) != length or hashlib.sha256(payload).digest() != digest:
        raise CheckpointError(f"{path} is corrupt (length or digest mismatch)")
    try:
        return _decode(payload, path if output_dir is None else None, output_dir)
    except (ValueError, KeyError, TypeError, struct.error) as exc:
        raise CheckpointError(f"{path} could not be decoded: {exc}") from None


def _decode(payload: bytes, path, output_dir) -> Checkpoint:
    (n,) = struct.unpack_from("<I", payload, 0)
    meta = json.loads(payload[4:4 + n].decode())
    offset = 4 + n
    out = output_dir if output_dir is not None else str(Path(path).parent)
    config = RunConfig(**meta["config"], output_dir=str(out))
    stats, offset = RunningStats.from_bytes(payload, offset)
    gens, offset = _unpack_population(payload, offset)
    discs, offset = _unpack_population(payload, offset)
    (n_elites,) = struct.unpack_from("<I", payload, offset)
    offset += 4
    elites = []
    for gen, idx in meta["elite_captures"][:n_elites]:
        s, offset = RunningStats.from_bytes(payload, offset)
        genome, offset = genome_from_bytes(payload, offset)
        elites.append((gen, idx, s, genome))
    if offset != len(payload):
        raise ValueError("trailing bytes after checkpoint payload")
    generation = meta["generation"]
    elite = meta["elite_indices"]
    state = RunState(
        get_spec(config.env), config.run_seed,
        Population("generator", gens, generation), Population("discriminator", discs, generation),
        stats, generation, config.sigma, config.matches_per_agent, config.elite_unmutated,
        tuple(elite) if elite is not None else None,
    )
    return Checkpoint(config, state, meta["ledger"], meta["history"], elites)
