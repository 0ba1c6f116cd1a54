"""Deterministic 64-bit PRNG used everywhere randomness is needed.

The generator is splitmix64: a single 64-bit counter state advanced by a
fixed odd constant, with the output derived through two xor-multiply
finalizer rounds. It is fast, trivially seedable, and bit-identical across
platforms, which is what makes campaign logs replayable.

The generator itself is a hot kernel (the havoc mutator draws from it on
every edit), so it lives in _rng.py, which setup.py also compiles into an
extension; the compiled build is preferred at import. Set MUTAFUZZ_PURE=1
to force the pure build.

Derived streams (per fuzzer, trial, supermutant, ...) are obtained with
:func:`derive`, which folds labels into a fresh seed instead of sharing
generator state between consumers.
"""

from __future__ import annotations

import os

if os.environ.get("MUTAFUZZ_PURE"):
    from ._rng import SplitMix64

    RNG_BACKEND = "pure"
else:
    try:
        from ._rng_compiled import SplitMix64  # type: ignore[no-redef]

        RNG_BACKEND = "compiled"
    except ImportError:
        from ._rng import SplitMix64  # type: ignore[no-redef]

        RNG_BACKEND = "pure"

MASK64 = 0xFFFFFFFFFFFFFFFF

_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def mix64(x: int) -> int:
    """One splitmix64 output step applied to a bare value."""
    x = (x + _GAMMA) & MASK64
    x = ((x ^ (x >> 30)) * _MIX1) & MASK64
    x = ((x ^ (x >> 27)) * _MIX2) & MASK64
    return x ^ (x >> 31)


def _fold_label(label: int | str) -> int:
    if isinstance(label, int):
        return label & MASK64
    h = _FNV_OFFSET
    for byte in label.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & MASK64
    return h


def derive(seed: int, *labels: int | str) -> int:
    """Derive a stream seed from a base seed and a sequence of labels.

    Strings are hashed with FNV-1a before mixing so that stream names such
    as fuzzer or supermutant ids can be used directly.
    """
    acc = seed & MASK64
    for label in labels:
        acc = mix64(acc ^ _fold_label(label))
    return acc


__all__ = ["MASK64", "RNG_BACKEND", "SplitMix64", "derive", "mix64"]
