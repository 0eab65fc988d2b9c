"""Seeded hash functions behind every randomized decision.

Randomness is derived per item from its content, never from a global RNG
stream, so results do not depend on processing order or worker count.
"""

MASK64 = (1 << 64) - 1
FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
SEPARATOR = b"\x1f"


def fnv1a64(data: bytes) -> int:
    h = FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * FNV_PRIME) & MASK64
    return h


def splitmix64(x: int) -> int:
    """First output of a SplitMix64 generator seeded with ``x``."""
    z = (x + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def unit_float(h: int) -> float:
    """Top 53 bits of a 64-bit hash mapped to [0, 1)."""
    return (h >> 11) / (1 << 53)


def seeded_hash(seed: int, *parts: str) -> int:
    data = SEPARATOR.join(p.encode("utf-8") for p in parts)
    return splitmix64((seed ^ fnv1a64(data)) & MASK64)
