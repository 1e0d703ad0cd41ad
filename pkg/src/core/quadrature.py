from functools import lru_cache

import numpy as np


@lru_cache(maxsize=32)
def _legendre_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(n)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_legendre(n: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """
    Gauss-Legendre nodes and weights mapped to [a, b].

    Args:
        n (int): Number of nodes.
        a (float): Lower integration limit.
        b (float): Upper integration limit.

    Returns:
        tuple[np.ndarray, np.ndarray]: Nodes and weights on [a, b].
    """
    nodes, weights = _legendre_rule(n)
    half = 0.5 * (b - a)
    return a + half * (nodes + 1.0), half * weights
