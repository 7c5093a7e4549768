"""Test-session setup.

The recurrent kernels issue many small matmuls; BLAS thread fan-out costs
more than it buys at these shapes, so pin the pools to one thread before
numpy first loads. Timing-sensitive acceptance tests rely on this.
"""

import os

for var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(var, "1")
