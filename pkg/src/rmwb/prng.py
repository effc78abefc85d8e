"""xorshift64* generator used for every seeded corpus."""

MASK64 = (1 << 64) - 1
MULTIPLIER = 0x2545F4914F6CDD1D
ZERO_SEED = 0x9E3779B97F4A7C15


class XorShift64Star:
    """Deterministic 64-bit stream; identical across platforms."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        seed &= MASK64
        self.state = seed if seed else ZERO_SEED

    def next_u64(self) -> int:
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & MASK64
        x ^= x >> 27
        self.state = x
        return (x * MULTIPLIER) & MASK64

    def next_bit(self) -> int:
        return self.next_u64() >> 63

    def below(self, bound: int) -> int:
        # rejection-free: plain modulo
        return self.next_u64() % bound


def mix(*values: int) -> int:
    """Hash a tuple of naturals to one output of the stream."""
    acc = ZERO_SEED
    for v in values:
        acc = XorShift64Star(acc ^ ((v * MULTIPLIER) & MASK64)).next_u64()
    return acc
