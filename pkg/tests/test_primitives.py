import random
from collections import Counter

import pytest

from authenc.bitcore import BitString, flip_bits, join_blocks, split_blocks, xor
from authenc.primitives import (
    AES128,
    Pad,
    ToyCipher,
    block_decrypt,
    block_encrypt,
    cbc_decrypt,
    cbc_encrypt,
    cbc_mac,
    ctr_crypt,
    ctr_keystream,
    increment_counter,
    otp_crypt,
)

from conftest import IdentityCipher

KEY = bytes(range(16))


def test_fips197_appendix_c1():
    # FIPS 197, Appendix C.1 (AES-128)
    aes = AES128(bytes.fromhex("000102030405060708090a0b0c0d0e0f"))
    pt = BitString.from_hex("00112233445566778899aabbccddeeff")
    assert block_encrypt(aes, pt).hex() == "69c4e0d86a7b0430d8cdb78070b4c55a"


def test_aes_key_length():
    with pytest.raises(ValueError):
        AES128(b"short")


def test_identity_fixture():
    b = BitString.from_hex("00112233445566778899aabbccddeeff")
    assert block_encrypt(IdentityCipher(), b) == b


def test_aes_inverse_random_blocks():
    aes = AES128(KEY)
    rng = random.Random(1)
    for _ in range(1000):
        b = BitString.random(128, rng)
        assert block_decrypt(aes, block_encrypt(aes, b)) == b


def test_toy_cipher_is_a_permutation():
    toy = ToyCipher(bytes(range(100, 116)))
    images = {toy.encrypt_block(x) for x in range(1 << 16)}
    assert len(images) == 1 << 16
    for x in range(0, 1 << 16, 97):
        assert toy.decrypt_block(toy.encrypt_block(x)) == x


def test_cbc_equation_and_roundtrip():
    aes = AES128(KEY)
    rng = random.Random(2)
    assert cbc_encrypt(aes, BitString.zeros(128), BitString()) == BitString()
    for _ in range(200):
        iv = BitString.random(128, rng)
        m = BitString.random(128 * rng.randint(1, 8), rng)
        c = cbc_encrypt(aes, iv, m)
        assert cbc_decrypt(aes, iv, c) == m
        prev = iv
        for p_i, c_i in zip(split_blocks(m), split_blocks(c)):
            assert block_encrypt(aes, xor(p_i, prev)) == c_i
            prev = c_i


def test_cbc_partial_block():
    with pytest.raises(ValueError):
        cbc_encrypt(AES128(KEY), BitString.zeros(128), BitString.zeros(100))


def test_cbc_roundtrip_toy_width():
    toy = ToyCipher(KEY)
    rng = random.Random(3)
    for _ in range(200):
        iv = BitString.random(16, rng)
        m = BitString.random(16 * rng.randint(1, 8), rng)
        assert cbc_decrypt(toy, iv, cbc_encrypt(toy, iv, m)) == m


def test_cbc_malleability_law():
    aes = AES128(KEY)
    rng = random.Random(4)
    for _ in range(100):
        iv = BitString.random(128, rng)
        m = BitString.random(128 * 4, rng)
        c = cbc_encrypt(aes, iv, m)
        surface = iv + c
        i = rng.randint(1, 4)  # plaintext block 1..4 (1-based); predecessor is surface block i-1
        j = rng.randrange(128)
        tampered = flip_bits(surface, {(i - 1) * 128 + j})
        got = split_blocks(cbc_decrypt(aes, tampered[:128], tampered[128:]))
        orig = split_blocks(m)
        for k in range(4):
            if k == i - 1:
                assert xor(got[k], orig[k]) == flip_bits(BitString.zeros(128), {j})
            elif k == i - 2:
                assert got[k] != orig[k]  # garbled predecessor
            else:
                assert got[k] == orig[k]


def test_ctr_keystream_matches_block_encrypt():
    aes = AES128(KEY)
    ctr0 = BitString.from_hex("f0f1f2f3f4f5f6f7f8f9fafbfcfdfeff")
    ks = ctr_keystream(aes, ctr0, 3)
    assert ks[0] == block_encrypt(aes, ctr0)
    assert ks[1] == block_encrypt(aes, BitString.from_hex("f0f1f2f3f4f5f6f7f8f9fafbfcfdff00"))
    assert ks[2] == block_encrypt(aes, BitString.from_hex("f0f1f2f3f4f5f6f7f8f9fafbfcfdff01"))


def test_sp800_38a_ctr_vector():
    # SP 800-38A F.5.1 CTR-AES128.Encrypt, first two blocks
    aes = AES128(bytes.fromhex("2b7e151628aed2a6abf7158809cf4f3c"))
    ctr0 = BitString.from_hex("f0f1f2f3f4f5f6f7f8f9fafbfcfdfeff")
    pt = BitString.from_hex("6bc1bee22e409f96e93d7e117393172aae2d8a571e03ac9c9eb76fac45af8e51")
    assert ctr_crypt(aes, ctr0, pt).hex() == "874d6191b620e3261bef6864990db6ce9806f66b7970fdff8617187bb9fffdff"


def test_counter_carries_only_in_low_32_bits():
    assert increment_counter(0x1_FFFFFFFF, 128) == 0x1_00000000
    with pytest.raises(ValueError):
        ctr_keystream(AES128(KEY), BitString(0xFFFFFFFF, 128), 2)


def test_ctr_involution_and_lengths():
    aes = AES128(KEY)
    rng = random.Random(5)
    ctr0 = BitString.random(96, rng) + BitString.zeros(32)
    assert ctr_crypt(aes, ctr0, BitString()) == BitString()
    for n in (1, 7, 127, 128, 129, 500):
        s = BitString.random(n, rng)
        assert ctr_crypt(aes, ctr0, ctr_crypt(aes, ctr0, s)) == s


def test_otp():
    rng = random.Random(6)
    s = BitString.random(77, rng)
    assert otp_crypt(Pad(BitString.zeros(77)), s) == s
    pad = Pad(BitString.random(100, rng))
    assert otp_crypt(pad, otp_crypt(pad, s)) == s
    with pytest.raises(ValueError):
        otp_crypt(Pad(BitString.zeros(10)), s)


def test_cbc_mac_shapes():
    aes = AES128(KEY)
    rng = random.Random(8)
    d1, d2 = BitString.random(128, rng), BitString.random(128, rng)
    assert cbc_mac(aes, d1, 64) == block_encrypt(aes, d1)[:64]
    assert cbc_mac(aes, d1 + d2, 96) == block_encrypt(aes, xor(block_encrypt(aes, d1), d2))[:96]
    assert cbc_mac(aes, d1 + d2, 64) == cbc_mac(aes, d1 + d2, 64)
    with pytest.raises(ValueError):
        cbc_mac(aes, BitString.zeros(100), 64)
    with pytest.raises(ValueError):
        cbc_mac(aes, d1, 16)


def test_cbc_mac_matches_iso9797_alg1_via_cbc():
    aes = AES128(KEY)
    rng = random.Random(9)
    m = BitString.random(128 * 5, rng)
    last = cbc_encrypt(aes, BitString.zeros(128), m)[-128:]
    assert cbc_mac(aes, m, 128) == last


def test_toy_cbc_mac_collisions_look_random():
    # 8-bit tags over all 2^16 single blocks: a permutation truncated to 8
    # bits hits every tag value exactly 256 times.
    toy = ToyCipher(bytes(range(16)))
    counts = Counter(cbc_mac(toy, BitString(x, 16), 8).value for x in range(1 << 16))
    assert len(counts) == 256 and set(counts.values()) == {256}
    # two-block inputs with a fixed first block: the distribution of 8-bit tags
    # over 4096 second blocks stays close to uniform
    tags = Counter(cbc_mac(toy, BitString(0x1234, 16) + BitString(x, 16), 8).value for x in range(4096))
    assert max(tags.values()) < 40
