from random import Random

import pytest

from reconfault.bitstream import FrameAddress
from reconfault.victims import (
    AesScenario,
    FltSig,
    aes_encrypt_reference,
    evaluate_adders,
    evaluate_aes,
    priority_encode,
)


class TestAesReference:
    def test_fips_appendix_c1_vector(self):
        key = bytes.fromhex("000102030405060708090a0b0c0d0e0f")
        pt = bytes.fromhex("00112233445566778899aabbccddeeff")
        assert aes_encrypt_reference(key, pt).hex() == "69c4e0d86a7b0430d8cdb78070b4c55a"

    def test_fips_appendix_b_vector(self):
        key = bytes.fromhex("2b7e151628aed2a6abf7158809cf4f3c")
        pt = bytes.fromhex("3243f6a8885a308d313198a2e0370734")
        assert aes_encrypt_reference(key, pt).hex() == "3925841d02dc09fbdc118597196a0b32"

    def test_deterministic(self):
        key = bytes(range(16))
        pt = bytes(range(16, 32))
        assert aes_encrypt_reference(key, pt) == aes_encrypt_reference(key, pt)

    def test_against_library_oracle(self):
        from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

        rng = Random(11)
        for _ in range(40):
            key = bytes(rng.randrange(256) for _ in range(16))
            pt = bytes(rng.randrange(256) for _ in range(16))
            enc = Cipher(algorithms.AES(key), modes.ECB()).encryptor()
            expected = enc.update(pt) + enc.finalize()
            assert aes_encrypt_reference(key, pt) == expected

    def test_bad_lengths_rejected(self):
        with pytest.raises(ValueError):
            aes_encrypt_reference(b"short", bytes(16))


class TestPriorityEncode:
    def test_no_flags(self):
        assert priority_encode(0, 500) == 0

    def test_single_flag(self):
        assert priority_encode(1 << 3, 500) == 4

    def test_lowest_index_wins(self):
        assert priority_encode((1 << 2) | (1 << 7), 500) == 3

    def test_width_bounds(self):
        with pytest.raises(ValueError):
            priority_encode(1, 1024)
        with pytest.raises(ValueError):
            priority_encode(1, 0)

    def test_flags_outside_width_masked(self):
        assert priority_encode(1 << 12, 8) == 0

    def test_exhaustive_small_width(self):
        for flags in range(1 << 6):
            expected = 0
            for i in range(6):
                if flags >> i & 1:
                    expected = i + 1
                    break
            assert priority_encode(flags, 6) == expected


class TestFltSig:
    def test_adder_packing(self):
        sig = FltSig.from_adder_fields(8, 3)
        assert sig.value == 8 | (3 << 10)
        assert sig.adder_field1 == 8
        assert sig.adder_field2 == 3

    def test_aes_packing(self):
        assert FltSig.from_aes_flags(0, 0).value == 0
        assert FltSig.from_aes_flags(1, 0).value == 1
        assert FltSig.from_aes_flags(0, 1).value == 2
        assert FltSig.from_aes_flags(1, 1).value == 3


class TestEvaluateAdders:
    def test_no_corruption(self, default_config):
        scenario = default_config.adder_scenario()
        flag1, flag2, sig = evaluate_adders(scenario, set())
        assert (flag1, flag2, sig.value) == (0, 0, 0)

    def test_single_adder_in_cluster_one(self, default_config):
        scenario = default_config.adder_scenario()
        flag1, flag2, sig = evaluate_adders(scenario, {("adder1_7", 0x12345679)})
        assert flag1 == 1 << 7
        assert flag2 == 0
        assert sig.adder_field1 == 8
        assert sig.adder_field2 == 0

    def test_lowest_corrupted_adder_wins(self, default_config):
        scenario = default_config.adder_scenario()
        corrupted = {("adder2_2", 3), ("adder2_9", 5)}
        _, flag2, sig = evaluate_adders(scenario, corrupted)
        assert flag2 == (1 << 2) | (1 << 9)
        assert sig.adder_field2 == 3

    def test_corrupted_encoder_scrambles_field(self, default_config):
        scenario = default_config.adder_scenario()
        digest = 0x0000_0C01
        _, _, sig = evaluate_adders(scenario, {("p1", digest)})
        assert sig.adder_field1 == (0 ^ digest) & 0x3FF
        assert sig.adder_field1 != 0
        assert sig.adder_field2 == 0

    def test_all_corruptions_flagged(self, default_config):
        # Odd digests guarantee a visible output error for every adder.
        scenario = default_config.adder_scenario()
        rng = Random(5)
        picks = {(f"adder1_{rng.randrange(500)}", rng.randrange(1 << 32) | 1) for _ in range(20)}
        flag1, _, _ = evaluate_adders(scenario, picks)
        for unit_id, _ in picks:
            index = int(unit_id.split("_")[1])
            assert flag1 >> index & 1

    def test_fabric_integration_encoder_damage(self, default_config):
        fabric = default_config.build_fabric()
        index = default_config.placement_index()
        p1 = next(pl for pl in index.placements if pl.unit_id == "p1")
        payload = [0xD000_0000 + i for i in range(default_config.frame_words)]
        fabric.apply_frames(FrameAddress(p1.prr_id, p1.frame_range[0]), payload)
        corrupted = fabric.diff_corrupted_units(index)
        assert {uid for uid, _ in corrupted} == {"p1"}
        (digest,) = [d for _, d in corrupted]
        _, _, sig = evaluate_adders(default_config.adder_scenario(), corrupted)
        assert sig.adder_field1 == digest & 0x3FF
        assert sig.adder_field2 == 0


class TestEvaluateAes:
    def test_flt_sig_enumeration(self, aes_config):
        scenario = aes_config.aes_scenario()
        cases = [
            (set(), 0),
            ({("aes1", 0xABC1)}, 1),
            ({("aes2", 0xABC1)}, 2),
            ({("aes1", 0xABC1), ("aes2", 0xDEF1)}, 3),
        ]
        for corrupted, expected in cases:
            flag1, flag2, sig = evaluate_aes(scenario, corrupted)
            assert sig.value == expected
            assert sig.value == flag1 + 2 * flag2

    def test_expected_ct_validated(self, aes_config):
        placements = aes_config.placements()
        with pytest.raises(ValueError):
            AesScenario(bytes(16), bytes(16), bytes(16), placements)

    def test_fabric_integration(self, aes_config):
        fabric = aes_config.build_fabric()
        index = aes_config.placement_index()
        payload = [0xD000_0000 + i for i in range(aes_config.frame_words)]
        fabric.apply_frames(FrameAddress(aes_config.aes2_prr, 0), payload)
        corrupted = fabric.diff_corrupted_units(index)
        _, _, sig = evaluate_aes(aes_config.aes_scenario(), corrupted)
        assert sig.value == 2
