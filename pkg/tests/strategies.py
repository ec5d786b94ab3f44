"""Shared hypothesis strategies."""

from __future__ import annotations

import numpy as np
from hypothesis import strategies as st

from amlj.ring import projective_ring, tensor_ring, x3_ring

RINGS = {
    "P1": projective_ring(1),
    "P3": projective_ring(3),
    "P1xP2": tensor_ring(projective_ring(1), projective_ring(2)),
    "X3": x3_ring(),
}

finite = st.floats(min_value=-3, max_value=3, allow_nan=False, allow_infinity=False)
cplx = st.builds(complex, finite, finite)
ring_names = st.sampled_from(sorted(RINGS))


@st.composite
def ring_and_classes(draw, count: int = 2, unit_part: bool = False):
    """A ring and ``count`` classes; ``unit_part`` forces a degree-0 part of size >= 0.5."""
    ring = RINGS[draw(ring_names)]
    out = []
    for _ in range(count):
        v = np.array([draw(cplx) for _ in range(ring.size)], dtype=complex)
        if unit_part:
            v[0] = complex(draw(st.floats(0.5, 3)), draw(st.floats(-1, 1)))
        out.append(v)
    return ring, out
