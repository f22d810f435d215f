"""Small shared helpers: labeled seed derivation and complex-set matching."""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(master: int, label: str) -> int:
    """Derive an independent child seed from a master seed and a label.

    Hashing (master, label) keeps subsystems (graph generation, initial
    conditions, heterogeneity draws, ...) statistically independent while
    letting each be reproduced in isolation.
    """
    digest = hashlib.sha256(f"{master}/{label}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def rng_for(master: int, label: str) -> np.random.Generator:
    """Generator seeded by :func:`derive_seed` of (master, label)."""
    return np.random.default_rng(derive_seed(master, label))


def greedy_match(a: np.ndarray, b: np.ndarray, tol: float) -> int:
    """Count greedy one-to-one matches between two complex value sets.

    Each element of ``a`` is matched to the nearest unconsumed element of
    ``b``; the pair counts when their distance is at most ``tol``.

    Returns:
        Number of matched pairs (at most ``min(len(a), len(b))``).
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex).copy()
    if a.size == 0 or b.size == 0:
        return 0
    used = np.zeros(b.size, dtype=bool)
    matched = 0
    # Process a's elements in a deterministic order (by value) so the count
    # does not depend on input ordering.
    order = np.lexsort((a.imag, a.real))
    for idx in order:
        dists = np.abs(b - a[idx])
        dists[used] = np.inf
        j = int(np.argmin(dists))
        if dists[j] <= tol:
            used[j] = True
            matched += 1
    return matched
