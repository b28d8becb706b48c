"""
Pinned pseudo-random source for synthetic workloads.

xoshiro256** run as LANES independent generators advanced in lock-step. Lane i is
seeded with splitmix64 outputs 4i..4i+3 of the user seed. Draw k comes from lane
k % LANES at step k // LANES, and each request consumes whole steps. Uniforms
are ((x >> 11) + 1) * 2^-53 in (0, 1]; normals use Box-Muller on consecutive
uniform pairs (u1, u2), emitting r*cos(2*pi*u2) then r*sin(2*pi*u2).
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
LANES = 1024


def splitmix64(state: int):
    state = (state + 0x9E3779B97F4A7C15) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def _rotl(x: np.ndarray, k: int) -> np.ndarray:
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


class Xoshiro256StarStar:
    def __init__(self, seed: int, lanes: int = LANES):
        sm = int(seed) & MASK64
        words = []
        for _ in range(4 * lanes):
            sm, out = splitmix64(sm)
            words.append(out)
        state = np.array(words, dtype=np.uint64).reshape(lanes, 4)
        self.s = [state[:, i].copy() for i in range(4)]
        self.lanes = lanes

    def _step(self) -> np.ndarray:
        s0, s1, s2, s3 = self.s
        result = _rotl(s1 * np.uint64(5), 7) * np.uint64(9)
        t = s1 << np.uint64(17)
        s2 = s2 ^ s0
        s3 = s3 ^ s1
        s1 = s1 ^ s2
        s0 = s0 ^ s3
        s2 = s2 ^ t
        s3 = _rotl(s3, 45)
        self.s = [s0, s1, s2, s3]
        return result

    def random_u64(self, n: int) -> np.ndarray:
        steps = -(-n // self.lanes)
        out = np.empty((steps, self.lanes), dtype=np.uint64)
        for i in range(steps):
            out[i] = self._step()
        return out.reshape(-1)[:n]

    def uniform(self, n: int) -> np.ndarray:
        x = self.random_u64(n)
        return ((x >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53

    def normal(self, n: int) -> np.ndarray:
        pairs = -(-n // 2)
        u = self.uniform(2 * pairs)
        u1, u2 = u[0::2], u[1::2]
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        z = np.empty(2 * pairs, dtype=np.float64)
        z[0::2] = r * np.cos(theta)
        z[1::2] = r * np.sin(theta)
        return z[:n]
