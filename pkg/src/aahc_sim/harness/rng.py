"""Named, replayable random streams derived from one global seed.

Each stream is a Philox counter-based generator whose 128-bit key is the
SHA-256 digest of ``(seed, name)``, so streams are independent of creation
order and identical across platforms.
"""

from __future__ import annotations

import hashlib

import numpy as np

STREAM_NAMES = ("env_init", "fading", "augment", "policy_ul", "policy_dl", "shuffle")


def stream(seed: int, name: str) -> np.random.Generator:
    digest = hashlib.sha256(f"{int(seed)}:{name}".encode()).digest()
    key = np.frombuffer(digest[:16], dtype="<u8").astype(np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def derive_streams(seed: int, names=STREAM_NAMES) -> dict[str, np.random.Generator]:
    if not 0 <= int(seed) < 2 ** 64:
        raise ValueError("seed must fit in 64 unsigned bits")
    return {name: stream(seed, name) for name in names}


def get_state(gen: np.random.Generator) -> dict:
    return gen.bit_generator.state


def set_state(gen: np.random.Generator, state: dict) -> None:
    gen.bit_generator.state = state
