import hashlib

import numpy as np

from cover.constants import HASH_NAME

SEED_MASK = 2**64 - 1


def derive_seed(master, *labels):
    """Derive a 64-bit child seed from a master seed and a label path.

    Every seeded component of a run (graph, placement, delays, sections,
    samples, codes) draws from its own child seed so that changing one
    component never perturbs another.

    Parameters:

        master (int):
            The master seed.

        *labels (Union[str, int]):
            The label path, e.g. `("node", 7, "sample")`.

    Returns:

        int:
            A seed in `[0, 2**64)`.
    """
    h = hashlib.new(HASH_NAME)
    h.update((int(master) & SEED_MASK).to_bytes(8, "little"))
    for label in labels:
        h.update(b"/")
        h.update(str(label).encode())
    return int.from_bytes(h.digest()[:8], "little")


def make_rng(seed, *labels):
    """Return a numpy `Generator` seeded from `derive_seed`.

    Parameters:

        seed (int):
            The master seed.

        *labels (Union[str, int]):
            Optional label path; with no labels the seed is used as is.

    Returns:

        numpy.random.Generator:
            The seeded generator.
    """
    if labels:
        seed = derive_seed(seed, *labels)
    return np.random.default_rng(int(seed) & SEED_MASK)


def is_power_of_two(value):
    return value >= 1 and value & (value - 1) == 0


def next_power_of_two(value, minimum=1):
    """Smallest power of two that is at least `value` and `minimum`."""
    size = max(1, minimum)
    while size < value:
        size *= 2
    return size


def xor_bytes(*chunks):
    """Bytewise XOR of equal-length byte strings."""
    if not chunks:
        raise ValueError("nothing to combine")
    size = len(chunks[0])
    acc = np.zeros(size, dtype=np.uint8)
    for chunk in chunks:
        if len(chunk) != size:
            raise ValueError("symbols differ in length")
        acc ^= np.frombuffer(chunk, dtype=np.uint8)
    return acc.tobytes()
