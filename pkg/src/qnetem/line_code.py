"""8b/10b line coding for the serial physical layer.

Standard 5b/6b + 3b/4b table encoding with the running-disparity rule.
Each table entry stores the codes emitted at negative and positive
running disparity; the alternate 4-bit code for .7 bytes (A7) replaces
the primary one exactly where the primary would stretch a run past
five bits. Control symbols (the K set) share the data sub-tables apart
from the K28 5b/6b block and always take the A7 form.

Bit order is abcdei fghj, most significant bit first, so the golden
comma K28.5 at negative disparity reads 0b0011111010.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from .errors import E_CODE, E_DISPARITY, FindingList

# 5b/6b table: x -> (code at RD-, code at RD+), bits abcdei.
_SIX = (
    (0b100111, 0b011000),  # D0
    (0b011101, 0b100010),  # D1
    (0b101101, 0b010010),  # D2
    (0b110001, 0b110001),  # D3
    (0b110101, 0b001010),  # D4
    (0b101001, 0b101001),  # D5
    (0b011001, 0b011001),  # D6
    (0b111000, 0b000111),  # D7
    (0b111001, 0b000110),  # D8
    (0b100101, 0b100101),  # D9
    (0b010101, 0b010101),  # D10
    (0b110100, 0b110100),  # D11
    (0b001101, 0b001101),  # D12
    (0b101100, 0b101100),  # D13
    (0b011100, 0b011100),  # D14
    (0b010111, 0b101000),  # D15
    (0b011011, 0b100100),  # D16
    (0b100011, 0b100011),  # D17
    (0b010011, 0b010011),  # D18
    (0b110010, 0b110010),  # D19
    (0b001011, 0b001011),  # D20
    (0b101010, 0b101010),  # D21
    (0b011010, 0b011010),  # D22
    (0b111010, 0b000101),  # D23
    (0b110011, 0b001100),  # D24
    (0b100110, 0b100110),  # D25
    (0b010110, 0b010110),  # D26
    (0b110110, 0b001001),  # D27
    (0b001110, 0b001110),  # D28
    (0b101110, 0b010001),  # D29
    (0b011110, 0b100001),  # D30
    (0b101011, 0b010100),  # D31
)
_K28_SIX = (0b001111, 0b110000)

# 3b/4b table: y -> (code at RD-, code at RD+), bits fghj. Entry 7 is
# the primary P7; the alternate A7 is separate.
_FOUR = (
    (0b1011, 0b0100),  # y0
    (0b1001, 0b1001),  # y1
    (0b0101, 0b0101),  # y2
    (0b1100, 0b0011),  # y3
    (0b1101, 0b0010),  # y4
    (0b1010, 0b1010),  # y5
    (0b0110, 0b0110),  # y6
    (0b1110, 0b0001),  # P7
)
_A7 = (0b0111, 0b1000)

# Control-symbol 3b/4b table (y 0..6): the balanced y1/y2/y5/y6 codes
# swap to their complements so every K 10-bit code stays outside the
# data code space; the rest match the data table.
_K_FOUR = (
    (0b1011, 0b0100),
    (0b0110, 0b1001),
    (0b1010, 0b0101),
    (0b1100, 0b0011),
    (0b1101, 0b0010),
    (0b0101, 0b1010),
    (0b1001, 0b0110),
)

# x values whose 6b code ends in a pair that P7 would extend to a run
# of five or more, keyed by the disparity at the 4b stage.
_A7_NEG = frozenset({17, 18, 20})
_A7_POS = frozenset({11, 13, 14})

VALID_CONTROL_BYTES = frozenset(
    {0xF7, 0xFB, 0xFD, 0xFE}  # K23.7, K27.7, K29.7, K30.7
    | {0x1C | (y << 5) for y in range(8)}  # K28.0 .. K28.7
)


@dataclass(frozen=True)
class Symbol10b:
    """One transmitted 10-bit symbol with its disparity context."""

    bits: int
    rd_in: int
    rd_out: int
    control: bool = False

    def __post_init__(self):
        if not 0 <= self.bits < 1024:
            raise ValueError("bits must fit in 10 bits")
        if self.rd_in not in (-1, 1) or self.rd_out not in (-1, 1):
            raise ValueError("disparity must be -1 or +1")


def _pick(pair, rd):
    return pair[0] if rd < 0 else pair[1]


def _encode_one(byte: int, control: bool, rd: int) -> Symbol10b:
    x = byte & 0x1F
    y = byte >> 5
    if control:
        if byte not in VALID_CONTROL_BYTES:
            raise ValueError(f"0x{byte:02X} is not a valid control byte")
        six = _pick(_K28_SIX, rd) if x == 28 else _pick(_SIX[x], rd)
    else:
        six = _pick(_SIX[x], rd)
    rd_mid = rd if bin(six).count("1") == 3 else -rd
    if y == 7:
        use_a7 = control or (rd_mid < 0 and x in _A7_NEG) or (rd_mid > 0 and x in _A7_POS)
        four = _pick(_A7 if use_a7 else _FOUR[7], rd_mid)
    else:
        four = _pick(_K_FOUR[y] if control else _FOUR[y], rd_mid)
    rd_out = rd_mid if bin(four).count("1") == 2 else -rd_mid
    return Symbol10b(bits=(six << 4) | four, rd_in=rd, rd_out=rd_out, control=control)


def encode_8b10b(
    data: Union[bytes, Sequence[int]],
    initial_disparity: int = -1,
    controls: Sequence[bool] = None,
) -> list[Symbol10b]:
    """Encode a byte string into 10-bit symbols.

    controls marks positions carrying control (K) bytes; data bytes
    otherwise. Raises ValueError for an invalid control byte.
    """
    if initial_disparity not in (-1, 1):
        raise ValueError("initial_disparity must be -1 or +1")
    rd = initial_disparity
    out = []
    for i, byte in enumerate(bytes(data) if isinstance(data, (bytes, bytearray)) else data):
        sym = _encode_one(int(byte), bool(controls[i]) if controls is not None else False, rd)
        out.append(sym)
        rd = sym.rd_out
    return out


def _decode_table():
    table = {}
    for byte in range(256):
        for rd in (-1, 1):
            sym = _encode_one(byte, False, rd)
            table.setdefault(sym.bits, {})[rd] = (byte, False, sym.rd_out)
    for byte in sorted(VALID_CONTROL_BYTES):
        for rd in (-1, 1):
            sym = _encode_one(byte, True, rd)
            table.setdefault(sym.bits, {})[rd] = (byte, True, sym.rd_out)
    return table


_DECODE = _decode_table()


@dataclass(frozen=True)
class DecodeResult:
    data: bytes
    controls: tuple
    findings: FindingList

    @property
    def ok(self) -> bool:
        return not self.findings


def _symbol_bits(sym) -> int:
    return sym.bits if isinstance(sym, Symbol10b) else int(sym)


def decode_8b10b(symbols: Iterable, initial_disparity: int = -1) -> DecodeResult:
    """Decode 10-bit symbols back to bytes, reporting violations.

    Unknown codewords yield an E_CODE finding and produce no byte; a
    known codeword arriving in the wrong disparity context yields
    E_DISPARITY, after which the decoder re-syncs to the symbol's legal
    context and keeps going. Findings carry the symbol index.
    """
    rd = initial_disparity
    out = bytearray()
    controls = []
    findings = FindingList()
    for i, raw in enumerate(symbols):
        bits = _symbol_bits(raw)
        entry = _DECODE.get(bits)
        if entry is None:
            findings.add(E_CODE, f"symbol {i}: 0b{bits:010b} not in code table", f"symbol:{i}")
            continue
        if rd not in entry:
            findings.add(E_DISPARITY, f"symbol {i}: wrong disparity context", f"symbol:{i}")
            rd = next(iter(entry))
        byte, control, rd_out = entry[rd]
        out.append(byte)
        controls.append(control)
        rd = rd_out
    return DecodeResult(data=bytes(out), controls=tuple(controls), findings=findings)


@dataclass(frozen=True)
class ComplianceReport:
    max_run_length: int
    disparity_ok: bool
    invalid_codes: tuple

    @property
    def compliant(self) -> bool:
        return self.max_run_length <= 5 and self.disparity_ok and not self.invalid_codes


def qphy_check(symbols: Iterable) -> ComplianceReport:
    """One-pass line-code compliance report over a symbol stream.

    Run length is measured on the concatenated bit stream, including
    across symbol boundaries. Disparity is acceptable if the stream
    chains legally from either starting disparity.
    """
    bits_list = [_symbol_bits(s) for s in symbols]
    max_run = 0
    run = 0
    prev = None
    for bits in bits_list:
        for k in range(9, -1, -1):
            b = (bits >> k) & 1
            run = run + 1 if b == prev else 1
            prev = b
            if run > max_run:
                max_run = run
    invalid = tuple(i for i, b in enumerate(bits_list) if b not in _DECODE)
    disparity_ok = False
    for start in (-1, 1):
        rd = start
        legal = True
        for bits in bits_list:
            entry = _DECODE.get(bits)
            if entry is None:
                continue  # reported via invalid_codes instead
            if rd not in entry:
                legal = False
                break
            rd = entry[rd][2]
        if legal:
            disparity_ok = True
            break
    return ComplianceReport(max_run_length=max_run, disparity_ok=disparity_ok, invalid_codes=invalid)
