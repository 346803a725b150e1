"""Stable seed derivation shared by the trainer, evaluator and generators."""

import hashlib


def derive_seed(*parts) -> int:
    """63-bit seed from a tuple of ints/strings.

    Depends only on the parts, so job scheduling order and worker count never
    change which seed a run receives.
    """
    text = ":".join(str(p) for p in parts).encode()
    return int.from_bytes(hashlib.blake2b(text, digest_size=8).digest(), "big") >> 1
