"""splitmix64 generator core.

Like minilang/_vm.py this file is plain Python that Cython also compiles
(to _rng_compiled); prng.py picks the compiled build when present. All
arithmetic is kept within uint64 range so the C build wraps exactly where
the pure build masks: both produce bit-identical streams.
"""

import cython

MASK64 = cython.declare(cython.ulonglong, 0xFFFFFFFFFFFFFFFF)

_GAMMA = cython.declare(cython.ulonglong, 0x9E3779B97F4A7C15)
_MIX1 = cython.declare(cython.ulonglong, 0xBF58476D1CE4E5B9)
_MIX2 = cython.declare(cython.ulonglong, 0x94D049BB133111EB)


@cython.cclass
class SplitMix64:
    """splitmix64 with helpers for bounded ints and byte strings."""

    state: cython.ulonglong

    def __init__(self, seed):
        self.state = seed & MASK64

    @cython.ccall
    def next_u64(self) -> cython.ulonglong:
        self.state = (self.state + _GAMMA) & MASK64
        z: cython.ulonglong = self.state
        z = ((z ^ (z >> 30)) * _MIX1) & MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & MASK64
        return z ^ (z >> 31)

    def below(self, n) -> int:
        """Uniform int in [0, n). Uses rejection to stay bias-free."""
        if n <= 0:
            raise ValueError("below() needs n >= 1")
        nn: cython.ulonglong = n
        # 2**64 mod n, computed without leaving uint64 range
        rem: cython.ulonglong = ((MASK64 % nn) + 1) % nn
        if rem == 0:
            return self.next_u64() % nn
        limit: cython.ulonglong = MASK64 - rem + 1
        while True:
            v: cython.ulonglong = self.next_u64()
            if v < limit:
                return v % nn

    def bytes(self, k) -> bytes:
        """k pseudo-random bytes, taken little-endian from u64 draws."""
        out = bytearray()
        total: cython.Py_ssize_t = k
        while len(out) < total:
            out += int(self.next_u64()).to_bytes(8, "little")
        return bytes(out[:total])
