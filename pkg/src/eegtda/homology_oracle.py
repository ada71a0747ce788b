"""Brute-force persistence oracle: full boundary matrix, plain Gaussian
elimination over Z/2, no clearing, no packing. Slow on purpose — it exists to
cross-check the optimized reduction on small instances."""

from __future__ import annotations

import numpy as np

from .homology import Filtration, PersistenceDiagram


def naive_persistence(filt: Filtration) -> PersistenceDiagram:
    ordered = list(filt.simplices())  # global (value, dim, lex) order
    index = {tup: i for i, (tup, _) in enumerate(ordered)}
    dims = [len(tup) - 1 for tup, _ in ordered]
    values = [val for _, val in ordered]

    columns = []
    for tup, _ in ordered:
        col = 0
        if len(tup) > 1:
            for k in range(len(tup)):
                face = tup[:k] + tup[k + 1:]
                col ^= 1 << index[face]
        columns.append(col)

    low_owner: dict[int, int] = {}
    pair_of: dict[int, int] = {}  # birth index -> death index
    for j in range(len(columns)):
        col = columns[j]
        while col:
            low = col.bit_length() - 1
            if low not in low_owner:
                break
            col ^= columns[low_owner[low]]
        columns[j] = col
        if col:
            low = col.bit_length() - 1
            low_owner[low] = j
            pair_of[low] = j

    pd = PersistenceDiagram(n_points=filt.n_points, max_dim=filt.max_dim,
                            threshold=filt.threshold)
    per_dim: dict[int, list] = {d: [] for d in range(filt.max_dim + 1)}
    for i in range(len(ordered)):
        if columns[i] != 0:
            continue  # i is a birth
        d = dims[i]
        if d > filt.max_dim:
            continue
        death = values[pair_of[i]] if i in pair_of else np.inf
        per_dim[d].append((values[i], death))
    for d, pairs in per_dim.items():
        b = np.array([p[0] for p in pairs], dtype=np.float64)
        de = np.array([p[1] for p in pairs], dtype=np.float64)
        order = np.lexsort((de, b))
        pd.births[d] = b[order]
        pd.deaths[d] = de[order]
    return pd
