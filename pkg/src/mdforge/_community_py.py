"""Pure-Python (numpy) fallback for the community-assignment kernel.

Semantics must stay bit-identical to mdforge._community_core; the
equivalence is covered by tests and benchmarks/bench_community.py.
"""

from __future__ import annotations

import numpy as np


def greedy_assign(
    indptr: np.ndarray, indices: np.ndarray, order: np.ndarray, n: int
) -> np.ndarray:
    """Assign sentences to communities by sweeping candidates in rank order.

    A candidate founds a community only while itself unassigned; it then
    claims every still-unassigned member of its neighborhood (itself
    included). Returns per-index labels (anchor index or -1).
    """
    labels = np.full(n, -1, dtype=np.int64)
    for i in order:
        if labels[i] != -1:
            continue
        members = indices[indptr[i] : indptr[i + 1]]
        free = members[labels[members] == -1]
        labels[free] = i
    return labels
