import numpy as np

from perspex import Breakpoints, Interval, PowerFn


def random_power_instance(
    rng,
    p_max=8.0,
    n_min=1,
    n_max=7,
    lower_max=2.0,
    width_max=3.0,
    positive_lower=False,
):
    """One random (PowerFn, Breakpoints) pair with well-separated points."""
    p = 1.0 + (p_max - 1.0) * rng.random()
    lower = lower_max * rng.random()
    if positive_lower:
        lower += 0.05
    width = 0.05 + (width_max - 0.05) * rng.random()
    iv = Interval(lower, lower + width)
    n = int(rng.integers(n_min, n_max + 1))
    while True:
        cuts = np.sort(rng.random(n - 1))
        gaps = np.diff(np.concatenate(([0.0], cuts, [1.0])))
        if (gaps > 1e-3).all():
            break
    xi = np.concatenate(([iv.lower], iv.lower + width * cuts, [iv.upper]))
    return PowerFn(p, iv), Breakpoints(iv, xi)
