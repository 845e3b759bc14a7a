"""Counter-based 64-bit random stream shared by both kernel backends.

Every uniform is a pure function of ``(key, index, draw)``: the key comes
from the user seed and a stream label, ``index`` numbers the shot (or the
trial/attempt pair) and ``draw`` numbers the random variable inside it.
Results therefore do not depend on how shots are split between workers.
"""

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
GOLDEN2 = 0xD1B54A32D192ED03
GOLDEN3 = 0xF1357AEA2E62A9C5
INV_2_53 = 1.0 / (1 << 53)

# stream labels
STREAM_MBAC = 1
STREAM_DIRECT = 2
STREAM_RUNS = 3
STREAM_CALIBRATION = 4
STREAM_BCS = 5


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a Python int."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_key(seed: int, *streams: int) -> int:
    """Fold a seed and any number of stream labels into one 64-bit key."""
    if seed < 0 or seed > MASK64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    key = mix64(seed)
    for s in streams:
        key = mix64(key ^ mix64((s + GOLDEN) & MASK64))
    return key


def shot_key(key: int, index: int) -> int:
    return mix64(key + (index + 1) * GOLDEN)


def uniform(key: int, index: int, draw: int) -> float:
    """Reference scalar implementation of one uniform in [0, 1)."""
    bits = mix64(shot_key(key, index) + (draw + 1) * GOLDEN2)
    return (bits >> 11) * INV_2_53
