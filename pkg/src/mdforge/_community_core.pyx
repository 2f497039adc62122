# Compiled community-assignment kernel. Must stay semantically identical
# to mdforge._community_py.greedy_assign.

import numpy as np


def greedy_assign(const long long[::1] indptr,
                  const long long[::1] indices,
                  const long long[::1] order,
                  Py_ssize_t n):
    labels_arr = np.full(n, -1, dtype=np.int64)
    cdef long long[::1] labels = labels_arr
    cdef Py_ssize_t oi
    cdef long long i, j, member
    for oi in range(order.shape[0]):
        i = order[oi]
        if labels[i] != -1:
            continue
        for j in range(indptr[i], indptr[i + 1]):
            member = indices[j]
            if labels[member] == -1:
                labels[member] = i
    return labels_arr
