import dataclasses
import hashlib
import hmac

import numpy as np
import pytest

from embedkey import keys
from embedkey.address import p2pkh_address
from embedkey.embedding import BinaryCode

# independent ECDSA/EC oracle (OpenSSL)
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.asymmetric import ec as openssl_ec
from cryptography.hazmat.primitives.asymmetric import utils as openssl_utils


def code_from_int(value: int) -> BinaryCode:
    bits = [(value >> (255 - i)) & 1 for i in range(256)]
    return BinaryCode(np.array(bits, dtype=np.uint8))


def random_code(rng) -> BinaryCode:
    return BinaryCode(rng.integers(0, 2, 256).astype(np.uint8))


def openssl_point(d: int):
    nums = openssl_ec.derive_private_key(d, openssl_ec.SECP256K1()).public_key().public_numbers()
    return nums.x, nums.y


class TestCurveParams:
    def test_generator_on_curve(self):
        x, y = keys.G
        assert (y * y - (x**3 + 7)) % keys.P == 0

    def test_order_times_generator_is_infinity(self):
        assert keys._point_mul(keys.N, keys.G) is None

    def test_cofactor(self):
        assert keys.H == 1


class TestSecretFromCode:
    def test_all_zero(self):
        assert keys.secret_from_code(code_from_int(0)) == bytes(32)

    def test_first_bit_packs_to_msb(self):
        bits = np.zeros(256, dtype=np.uint8)
        bits[0] = 1
        secret = keys.secret_from_code(BinaryCode(bits))
        assert secret[0] == 0x80 and secret[1:] == bytes(31)

    def test_matches_per_bit_packing_oracle(self, rng):
        code = random_code(rng)
        secret = keys.secret_from_code(code)
        for i, bit in enumerate(code.bits):
            byte, offset = divmod(i, 8)
            assert (secret[byte] >> (7 - offset)) & 1 == bit

    def test_wrong_dim_rejected(self):
        with pytest.raises(ValueError):
            keys.secret_from_code(BinaryCode(np.ones(128, dtype=np.uint8)))


class TestPbkdf2:
    def test_published_vector(self):
        out = keys.pbkdf2_derive(b"password", b"salt", 1)
        assert out.hex() == "120fb6cffcf8b32c43e7225256c4f837a86548c92ccc35480805987cb70be17b"

    def test_matches_straight_line_hmac_chain(self):
        # independent re-implementation: F(1) = U1 ^ U2 ^ ... ^ Uc
        def oracle(password, salt, iters):
            u = hmac.new(password, salt + (1).to_bytes(4, "big"), hashlib.sha256).digest()
            acc = int.from_bytes(u, "big")
            for _ in range(iters - 1):
                u = hmac.new(password, u, hashlib.sha256).digest()
                acc ^= int.from_bytes(u, "big")
            return acc.to_bytes(32, "big")

        for password, salt, iters in [
            (b"password", b"salt", 1),
            (b"password", b"salt", 4096),
            (b"", b"embedkey-v1", 3),
            (b"pass\x00word", b"sa\x00lt", 7),
        ]:
            assert keys.pbkdf2_derive(password, salt, iters) == oracle(password, salt, iters)

    def test_deterministic(self):
        assert keys.pbkdf2_derive(b"x", b"y", 10) == keys.pbkdf2_derive(b"x", b"y", 10)

    def test_salt_matters(self):
        assert keys.pbkdf2_derive(b"p", b"salt", 5) != keys.pbkdf2_derive(b"p", b"salt2", 5)

    def test_zero_iterations_rejected(self):
        with pytest.raises(ValueError):
            keys.pbkdf2_derive(b"p", b"s", 0)


class TestDerivePrivateKey:
    def test_zero_code_hits_remap(self):
        priv = keys.derive_private_key(code_from_int(0))
        # independent big-integer oracle for the fallback formula
        expected = int.from_bytes(hashlib.sha256(bytes(32)).digest(), "big") % (keys.N - 1) + 1
        assert priv.d == expected

    def test_all_ones_code_hits_remap(self):
        code = code_from_int(2**256 - 1)
        priv = keys.derive_private_key(code)
        secret = (2**256 - 1).to_bytes(32, "big")
        expected = int.from_bytes(hashlib.sha256(secret).digest(), "big") % (keys.N - 1) + 1
        assert priv.d == expected

    def test_in_range_code_passes_through(self):
        assert keys.derive_private_key(code_from_int(1)).d == 1
        assert keys.derive_private_key(code_from_int(123456789)).d == 123456789

    def test_password_changes_key(self):
        code = code_from_int(42)
        no_pw = keys.derive_private_key(code)
        with_pw = keys.derive_private_key(code, b"x", b"salt", 2)
        assert no_pw.d != with_pw.d

    def test_password_branch_formula(self):
        code = code_from_int(42)
        secret = keys.secret_from_code(code)
        stretched = keys.pbkdf2_derive(b"x", b"salt", 2)
        expected = int.from_bytes(hashlib.sha256(secret + stretched).digest(), "big")
        assert keys.derive_private_key(code, b"x", b"salt", 2).d == expected

    def test_empty_password_distinct_from_none(self):
        code = code_from_int(42)
        assert keys.derive_private_key(code, b"", b"s", 2).d != keys.derive_private_key(code).d

    def test_total_and_in_range(self, rng):
        for _ in range(20):
            priv = keys.derive_private_key(random_code(rng))
            assert 1 <= priv.d <= keys.N - 1

    def test_deterministic(self, rng):
        code = random_code(rng)
        assert keys.derive_private_key(code) == keys.derive_private_key(code)


class TestDerivePublicKey:
    def test_d1_gives_generator(self):
        pub = keys.derive_public_key(keys.PrivateKey(1))
        assert (pub.x, pub.y) == keys.G

    def test_d2_matches_independent_oracle(self):
        pub = keys.derive_public_key(keys.PrivateKey(2))
        assert (pub.x, pub.y) == openssl_point(2)

    def test_random_scalars_match_independent_oracle(self, rng):
        for _ in range(5):
            d = int(rng.integers(2, 2**62))
            pub = keys.derive_public_key(keys.PrivateKey(d))
            assert (pub.x, pub.y) == openssl_point(d)

    def test_out_of_range_scalar_rejected(self):
        with pytest.raises(ValueError):
            keys.PrivateKey(keys.N)
        with pytest.raises(ValueError):
            keys.PrivateKey(0)

    def test_derived_points_on_curve(self, rng):
        for _ in range(10):
            pub = keys.derive_public_key(keys.derive_private_key(random_code(rng)))
            assert (pub.y**2 - (pub.x**3 + 7)) % keys.P == 0


class TestPublicKeySerialization:
    def test_uncompressed_roundtrip(self, rng):
        pub = keys.derive_public_key(keys.PrivateKey(int(rng.integers(1, 2**60))))
        assert keys.PublicKey.parse(pub.serialize(False)) == pub

    def test_compressed_roundtrip(self, rng):
        for _ in range(4):
            pub = keys.derive_public_key(keys.PrivateKey(int(rng.integers(1, 2**60))))
            data = pub.serialize(True)
            assert len(data) == 33
            assert keys.PublicKey.parse(data) == pub

    def test_off_curve_rejected(self):
        with pytest.raises(ValueError):
            keys.PublicKey(1, 1)

    def test_garbage_encoding_rejected(self):
        with pytest.raises(ValueError):
            keys.PublicKey.parse(b"\x05" + bytes(64))


class TestSignVerify:
    def test_roundtrip_100_random(self, rng):
        for _ in range(100):
            d = int(rng.integers(1, 2**63))
            message = rng.bytes(24)
            priv = keys.PrivateKey(d)
            sig = keys.sign(priv, message)
            assert keys.verify(keys.derive_public_key(priv), message, sig)

    def test_deterministic(self):
        priv = keys.PrivateKey(7)
        assert keys.sign(priv, b"msg") == keys.sign(priv, b"msg")

    def test_low_s(self, rng):
        for _ in range(10):
            sig = keys.sign(keys.PrivateKey(int(rng.integers(1, 2**60))), rng.bytes(8))
            assert 1 <= sig.s <= keys.N // 2

    def test_openssl_accepts_our_signature(self):
        priv = keys.PrivateKey(1)
        sig = keys.sign(priv, b"test")
        sha256d = hashlib.sha256(hashlib.sha256(b"test").digest()).digest()
        opub = openssl_ec.derive_private_key(1, openssl_ec.SECP256K1()).public_key()
        opub.verify(
            openssl_utils.encode_dss_signature(sig.r, sig.s),
            sha256d,
            openssl_ec.ECDSA(openssl_utils.Prehashed(hashes.SHA256())),
        )  # raises on failure

    def test_we_accept_openssl_signature(self):
        opriv = openssl_ec.derive_private_key(0x1234, openssl_ec.SECP256K1())
        message = b"cross check"
        sha256d = hashlib.sha256(hashlib.sha256(message).digest()).digest()
        der = opriv.sign(sha256d, openssl_ec.ECDSA(openssl_utils.Prehashed(hashes.SHA256())))
        r, s = openssl_utils.decode_dss_signature(der)
        nums = opriv.public_key().public_numbers()
        assert keys.verify(keys.PublicKey(nums.x, nums.y), message, keys.Signature(r, s))

    def test_wrong_message_rejected(self):
        priv = keys.PrivateKey(99)
        pub = keys.derive_public_key(priv)
        sig = keys.sign(priv, b"hello world")
        assert not keys.verify(pub, b"hello worlD", sig)

    def test_wrong_key_rejected(self):
        sig = keys.sign(keys.PrivateKey(99), b"m")
        assert not keys.verify(keys.derive_public_key(keys.PrivateKey(100)), b"m", sig)

    def test_zeroed_components_rejected(self):
        priv = keys.PrivateKey(99)
        pub = keys.derive_public_key(priv)
        sig = keys.sign(priv, b"m")
        assert not keys.verify(pub, b"m", dataclasses.replace(sig, r=0))
        assert not keys.verify(pub, b"m", dataclasses.replace(sig, s=0))

    def test_signatures_not_transferable_between_keys(self):
        p1, p2 = keys.PrivateKey(11), keys.PrivateKey(22)
        sig1 = keys.sign(p1, b"m")
        sig2 = keys.sign(p2, b"m")
        assert not keys.verify(keys.derive_public_key(p1), b"m", sig2)
        assert not keys.verify(keys.derive_public_key(p2), b"m", sig1)


class TestAvalanche:
    def test_single_bit_flips_change_address(self, rng):
        base = random_code(rng)
        addresses = set()
        positions = rng.choice(256, size=32, replace=False)
        for pos in positions:
            bits = base.bits.copy()
            bits[pos] ^= 1
            pub = keys.derive_public_key(keys.derive_private_key(BinaryCode(bits)))
            addresses.add(p2pkh_address(pub).text)
        base_addr = p2pkh_address(keys.derive_public_key(keys.derive_private_key(base))).text
        assert len(addresses) == 32
        assert base_addr not in addresses
