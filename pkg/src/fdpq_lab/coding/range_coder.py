"""Binary range coder with adaptive 12-bit probability contexts and bypass bins."""

from __future__ import annotations

from fdpq_lab.errors import MalformedStreamError, TruncatedStreamError

PROB_BITS = 12
PROB_ONE = 1 << PROB_BITS
PROB_INIT = PROB_ONE // 2
ADAPT_SHIFT = 5
TOP = 1 << 24
MASK32 = 0xFFFFFFFF
MAX_EXP_GOLOMB_PREFIX = 32


class BinContext:
    """Probability that the next bin is 0, in units of ``2**-12``."""

    __slots__ = ("p0",)

    def __init__(self, p0: int = PROB_INIT) -> None:
        self.p0 = p0

    def update(self, bit: int) -> None:
        if bit:
            self.p0 -= self.p0 >> ADAPT_SHIFT
        else:
            self.p0 += (PROB_ONE - self.p0) >> ADAPT_SHIFT


class RangeEncoder:
    """Carry-propagating range encoder; ``finish`` flushes and returns the payload."""

    def __init__(self) -> None:
        self._low = 0
        self._range = MASK32
        self._cache = 0
        self._cache_size = 1
        self._out = bytearray()
        self.bins_coded = 0

    def _shift_low(self) -> None:
        if (self._low & MASK32) < 0xFF000000 or self._low > MASK32:
            carry = self._low >> 32
            pending = self._cache
            while True:
                self._out.append((pending + carry) & 0xFF)
                pending = 0xFF
                self._cache_size -= 1
                if self._cache_size == 0:
                    break
            self._cache = (self._low >> 24) & 0xFF
        self._cache_size += 1
        self._low = (self._low & 0x00FFFFFF) << 8

    def _normalise(self) -> None:
        while self._range < TOP:
            self._range <<= 8
            self._shift_low()

    def encode_bin(self, context: BinContext, bit: int) -> None:
        bound = (self._range >> PROB_BITS) * context.p0
        if bit:
            self._low += bound
            self._range -= bound
        else:
            self._range = bound
        context.update(bit)
        self.bins_coded += 1
        self._normalise()

    def encode_bypass(self, bit: int) -> None:
        self._range >>= 1
        if bit:
            self._low += self._range
        self.bins_coded += 1
        self._normalise()

    def encode_bypass_bits(self, value: int, width: int) -> None:
        """Write ``value`` most-significant bit first as ``width`` bypass bins."""

        for shift in range(width - 1, -1, -1):
            self.encode_bypass((value >> shift) & 1)

    def encode_exp_golomb(self, value: int) -> None:
        """Order-0 exp-Golomb code of a non-negative integer in bypass bins."""

        code = value + 1
        length = code.bit_length()
        for _ in range(length - 1):
            self.encode_bypass(0)
        self.encode_bypass_bits(code, length)

    def finish(self) -> bytes:
        for _ in range(5):
            self._shift_low()
        return bytes(self._out)


class RangeDecoder:
    """Mirror of :class:`RangeEncoder`; reading past the payload raises :class:`TruncatedStreamError`."""

    def __init__(self, data: bytes) -> None:
        self._data = data
        self._position = 0
        self._range = MASK32
        self._code = 0
        for _ in range(5):
            self._code = (self._code << 8) | self._next_byte()

    def _next_byte(self) -> int:
        if self._position >= len(self._data):
            raise TruncatedStreamError(
                f"Payload exhausted after {len(self._data)} bytes while decoding"
            )
        value = self._data[self._position]
        self._position += 1
        return value

    @property
    def bytes_consumed(self) -> int:
        return self._position

    def _normalise(self) -> None:
        while self._range < TOP:
            self._range <<= 8
            self._code = ((self._code << 8) | self._next_byte()) & MASK32

    def decode_bin(self, context: BinContext) -> int:
        bound = (self._range >> PROB_BITS) * context.p0
        if self._code < bound:
            self._range = bound
            bit = 0
        else:
            self._code -= bound
            self._range -= bound
            bit = 1
        context.update(bit)
        self._normalise()
        return bit

    def decode_bypass(self) -> int:
        self._range >>= 1
        if self._code >= self._range:
            self._code -= self._range
            bit = 1
        else:
            bit = 0
        self._normalise()
        return bit

    def decode_bypass_bits(self, width: int) -> int:
        value = 0
        for _ in range(width):
            value = (value << 1) | self.decode_bypass()
        return value

    def decode_exp_golomb(self) -> int:
        prefix = 0
        while self.decode_bypass() == 0:
            prefix += 1
            if prefix > MAX_EXP_GOLOMB_PREFIX:
                raise MalformedStreamError("exp-Golomb prefix exceeds 32 zero bins")
        return ((1 << prefix) | self.decode_bypass_bits(prefix)) - 1
