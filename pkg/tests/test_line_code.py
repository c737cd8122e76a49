import re

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qnetem import line_code
from qnetem.errors import E_CODE, E_DISPARITY


def bits10(sym):
    return format(sym.bits, "010b")


def stream_bits(symbols):
    return "".join(bits10(s) for s in symbols)


def max_run(bitstring):
    return max(len(m.group(0)) for m in re.finditer(r"0+|1+", bitstring))


# Published 8b/10b vectors (abcdei fghj), independent of the module's tables.
GOLDEN = [
    # (byte, control, rd_in, encoded bits)
    (0x00, False, -1, "1001110100"),  # D0.0
    (0x00, False, +1, "0110001011"),
    (0xB5, False, -1, "1010101010"),  # D21.5
    (0xB5, False, +1, "1010101010"),
    (0x4A, False, -1, "0101010101"),  # D10.2
    (0xF7, False, -1, "1110100001"),  # D23.7 (data, not the K code)
    (0xF1, False, -1, "1000110111"),  # D17.7 uses A7 at RD-
    (0xF1, False, +1, "1000110001"),  # D17.7 primary at RD+
    (0xEB, False, -1, "1101001110"),  # D11.7 primary at RD-
    (0xEB, False, +1, "1101001000"),  # D11.7 uses A7 at RD+
    (0x63, False, -1, "1100011100"),  # D3.3
    (0x63, False, +1, "1100010011"),
    (0x7E, False, -1, "0111100011"),  # D30.3
    (0x7E, False, +1, "1000011100"),
    (0xBC, True, -1, "0011111010"),  # K28.5 comma
    (0xBC, True, +1, "1100000101"),
    (0x1C, True, -1, "0011110100"),  # K28.0
    (0xF7, True, -1, "1110101000"),  # K23.7
    (0xF7, True, +1, "0001010111"),
]


class TestGoldenVectors:
    @pytest.mark.parametrize("byte,control,rd,want", GOLDEN)
    def test_encode_matches_published_table(self, byte, control, rd, want):
        sym = line_code.encode_8b10b([byte], rd, controls=[control])[0]
        assert bits10(sym) == want

    @pytest.mark.parametrize("byte,control,rd,want", GOLDEN)
    def test_decode_recovers_byte(self, byte, control, rd, want):
        res = line_code.decode_8b10b([int(want, 2)], rd)
        assert res.ok
        assert res.data == bytes([byte])
        assert res.controls == (control,)


class TestRoundTrip:
    @settings(max_examples=300, deadline=None)
    @given(data=st.binary(max_size=200), rd=st.sampled_from([-1, 1]))
    def test_identity(self, data, rd):
        symbols = line_code.encode_8b10b(data, rd)
        res = line_code.decode_8b10b(symbols, rd)
        assert res.ok
        assert res.data == data
        assert not any(res.controls)

    def test_large_random_payload(self):
        data = np.random.default_rng(0).integers(0, 256, 4096).astype(np.uint8).tobytes()
        for rd in (-1, 1):
            res = line_code.decode_8b10b(line_code.encode_8b10b(data, rd), rd)
            assert res.ok and res.data == data

    def test_mixed_control_frame(self):
        payload = b"\xbc\x02\x51\xbc"
        controls = [True, False, False, True]
        symbols = line_code.encode_8b10b(payload, -1, controls=controls)
        res = line_code.decode_8b10b(symbols, -1)
        assert res.ok
        assert res.data == payload
        assert list(res.controls) == controls


class TestLineInvariants:
    @settings(max_examples=200, deadline=None)
    @given(data=st.binary(min_size=1, max_size=120), rd=st.sampled_from([-1, 1]))
    def test_run_length_bounded(self, data, rd):
        assert max_run(stream_bits(line_code.encode_8b10b(data, rd))) <= 5

    @pytest.mark.parametrize("payload", [b"\x00" * 64, b"\xff" * 64, b"\xaa\x55" * 32])
    def test_run_length_on_adversarial_bytes(self, payload):
        for rd in (-1, 1):
            assert max_run(stream_bits(line_code.encode_8b10b(payload, rd))) <= 5

    @settings(max_examples=200, deadline=None)
    @given(data=st.binary(min_size=1, max_size=120), rd=st.sampled_from([-1, 1]))
    def test_dc_balance_at_boundaries(self, data, rd):
        imbalance = 0
        for sym in line_code.encode_8b10b(data, rd):
            ones = bits10(sym).count("1")
            imbalance += ones - (10 - ones)
            assert abs(imbalance) <= 2

    @settings(max_examples=200, deadline=None)
    @given(byte=st.integers(0, 255), rd=st.sampled_from([-1, 1]))
    def test_disparity_update_rule(self, byte, rd):
        sym = line_code.encode_8b10b([byte], rd)[0]
        ones = bits10(sym).count("1")
        assert ones in (4, 5, 6)
        assert sym.rd_out == (rd if ones == 5 else -rd)

    def test_decode_table_is_unambiguous(self):
        seen = {}
        entries = [(b, False) for b in range(256)]
        entries += [(b, True) for b in sorted(line_code.VALID_CONTROL_BYTES)]
        for byte, control in entries:
            for rd in (-1, 1):
                sym = line_code.encode_8b10b([byte], rd, controls=[control])[0]
                key = (sym.bits, rd)
                assert seen.setdefault(key, (byte, control)) == (byte, control)


class TestDecodeErrors:
    def test_all_zero_symbol_invalid(self):
        res = line_code.decode_8b10b([0])
        assert not res.ok
        assert res.findings[0].code == E_CODE
        assert res.findings[0].element == "symbol:0"
        assert res.data == b""

    def test_disparity_violation_indexed_and_resynced(self):
        good = line_code.encode_8b10b(b"AB", -1)
        res = line_code.decode_8b10b(good, +1)
        assert res.findings[0].code == E_DISPARITY
        assert res.findings[0].element == "symbol:0"
        assert res.data == b"AB"  # resync still recovers the payload

    def test_invalid_control_byte_rejected(self):
        with pytest.raises(ValueError):
            line_code.encode_8b10b([0x00], -1, controls=[True])


class TestQphyCheck:
    def test_encoder_output_compliant(self):
        data = np.random.default_rng(1).integers(0, 256, 2000).astype(np.uint8).tobytes()
        report = line_code.qphy_check(line_code.encode_8b10b(data, -1))
        assert report.compliant
        assert report.max_run_length <= 5
        assert report.disparity_ok
        assert report.invalid_codes == ()

    def test_raw_ff_bytes_violate_run_length(self):
        report = line_code.qphy_check([0xFF, 0xFF, 0xFF])
        assert report.max_run_length > 5
        assert not report.compliant

    def test_golden_stream_compliant(self):
        symbols = line_code.encode_8b10b(
            b"\xbc\x00\xb5\x4a", -1, controls=[True, False, False, False]
        )
        report = line_code.qphy_check(symbols)
        assert report.compliant

    def test_broken_disparity_chain_flagged(self):
        sym = line_code.encode_8b10b(b"\x20", -1)[0]  # D0.1: unbalanced, ends RD+
        report = line_code.qphy_check([sym.bits, sym.bits])
        assert not report.disparity_ok
        assert not report.compliant
