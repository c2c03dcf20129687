import itertools

import numpy as np


def mixed_partial(cdf, x, h):
    """Mixed partial d^n F / dx_1..dx_n by tensor-product central differences."""
    x = np.asarray(x, dtype=float)
    n = x.size
    total = 0.0
    for signs in itertools.product((-1.0, 1.0), repeat=n):
        s = np.array(signs)
        total += np.prod(s) * cdf(x + h * s)
    return total / (2.0 * h) ** n


def density_oracle(cdf, x, h=1e-3):
    """Richardson-extrapolated mixed-partial density estimate."""
    d1 = mixed_partial(cdf, x, h)
    d2 = mixed_partial(cdf, x, h / 2.0)
    return (4.0 * d2 - d1) / 3.0
