import random

from noetherkit import symbols as sy
from noetherkit.expr import evaluate


def central_difference(e, s, point, h=1e-5):
    """Independent derivative oracle: centered finite difference of evaluate."""
    up = dict(point)
    dn = dict(point)
    up[s] = up[s] + h
    dn[s] = dn[s] - h
    return (evaluate(e, up) - evaluate(e, dn)) / (2 * h)


def random_point(symbols, rng, low=-2.0, high=2.0):
    return {s: rng.uniform(low, high) for s in symbols}


def seeded(seed):
    return random.Random(seed)
