"""Pairing conventions shared by the construction layouts."""
from __future__ import annotations

from math import isqrt


def pair(i: int, j: int) -> int:
    """Cantor pairing N x N -> N."""
    return (i + j) * (i + j + 1) // 2 + j


def unpair(m: int) -> tuple[int, int]:
    w = (isqrt(8 * m + 1) - 1) // 2
    j = m - w * (w + 1) // 2
    return w - j, j


def tri_encode(k: int, t: int) -> int:
    """Bijection {(k, t) : 0 <= t < k} -> N."""
    if not 0 <= t < k:
        raise ValueError("need 0 <= t < k")
    return k * (k - 1) // 2 + t


def tri_decode(q: int) -> tuple[int, int]:
    k = (isqrt(8 * q + 1) + 1) // 2
    if k * (k - 1) // 2 > q:
        k -= 1
    return k, q - k * (k - 1) // 2


def zigzag(z: int) -> int:
    """Z -> N: 0, -1, 1, -2, 2, ... -> 0, 1, 2, 3, 4, ..."""
    return 2 * z if z >= 0 else -2 * z - 1


def unzigzag(n: int) -> int:
    return n // 2 if n % 2 == 0 else -(n + 1) // 2
