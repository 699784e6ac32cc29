"""secp256k1 key derivation and ECDSA for the redeem flow.

The private scalar is derived deterministically from a 256-bit code (plus an
optional PBKDF2-stretched password) instead of a PRNG; everything downstream
is standard: Q = dG on y^2 = x^3 + 7, ECDSA over SHA256D message digests with
deterministic HMAC-derived nonces and canonical low-s signatures.

Scalar multiplication is a plain affine double-and-add. It is NOT
constant-time and leaks timing information about the scalar; this package is
a demonstration artifact, not wallet software.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass
from typing import Optional

from .embedding import BinaryCode

__all__ = [
    "P",
    "N",
    "G",
    "PrivateKey",
    "PublicKey",
    "Signature",
    "secret_from_code",
    "pbkdf2_derive",
    "derive_private_key",
    "derive_public_key",
    "sign",
    "verify",
    "DEFAULT_SALT",
    "DEFAULT_ITERATIONS",
]

# SEC2 secp256k1 domain parameters
P = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEFFFFFC2F
A = 0
B = 7
GX = 0x79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798
GY = 0x483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8
G = (GX, GY)
N = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141
H = 1

DEFAULT_SALT = b"embedkey-v1"
DEFAULT_ITERATIONS = 100_000

# Affine point; None is the point at infinity (kept internal to this module).
Point = Optional[tuple[int, int]]


def _on_curve(x: int, y: int) -> bool:
    return (y * y - (x * x * x + A * x + B)) % P == 0


def _point_add(p: Point, q: Point) -> Point:
    if p is None:
        return q
    if q is None:
        return p
    x1, y1 = p
    x2, y2 = q
    if x1 == x2:
        if (y1 + y2) % P == 0:
            return None
        lam = (3 * x1 * x1 + A) * pow(2 * y1, -1, P) % P
    else:
        lam = (y2 - y1) * pow(x2 - x1, -1, P) % P
    x3 = (lam * lam - x1 - x2) % P
    y3 = (lam * (x1 - x3) - y1) % P
    return (x3, y3)


def _point_mul(k: int, p: Point) -> Point:
    """Double-and-add; k may be any nonnegative integer (k*order(p) gives None)."""
    if k < 0:
        raise ValueError("scalar must be nonnegative")
    result: Point = None
    addend = p
    while k:
        if k & 1:
            result = _point_add(result, addend)
        addend = _point_add(addend, addend)
        k >>= 1
    return result


@dataclass(frozen=True)
class PrivateKey:
    d: int

    def __post_init__(self):
        if not 1 <= self.d <= N - 1:
            raise ValueError(f"private scalar must lie in [1, n-1], got {self.d:#x}")

    def to_bytes(self) -> bytes:
        return self.d.to_bytes(32, "big")

    def hex(self) -> str:
        return self.to_bytes().hex()


@dataclass(frozen=True)
class PublicKey:
    x: int
    y: int

    def __post_init__(self):
        if not (0 <= self.x < P and 0 <= self.y < P):
            raise ValueError("public key coordinates must be field elements")
        if not _on_curve(self.x, self.y):
            raise ValueError("point is not on the secp256k1 curve")

    def serialize(self, compressed: bool = False) -> bytes:
        if compressed:
            prefix = b"\x03" if self.y & 1 else b"\x02"
            return prefix + self.x.to_bytes(32, "big")
        return b"\x04" + self.x.to_bytes(32, "big") + self.y.to_bytes(32, "big")

    @classmethod
    def parse(cls, data: bytes) -> "PublicKey":
        """Parse SEC-encoded bytes: 0x04||x||y or 0x02/0x03||x."""
        if len(data) == 65 and data[0] == 0x04:
            return cls(int.from_bytes(data[1:33], "big"), int.from_bytes(data[33:], "big"))
        if len(data) == 33 and data[0] in (0x02, 0x03):
            x = int.from_bytes(data[1:], "big")
            # p = 3 (mod 4), so sqrt is a single exponentiation
            y = pow((x * x * x + A * x + B) % P, (P + 1) // 4, P)
            if y * y % P != (x * x * x + A * x + B) % P:
                raise ValueError("x coordinate has no square root on the curve")
            if (y & 1) != (data[0] & 1):
                y = P - y
            return cls(x, y)
        raise ValueError(f"unrecognized public key encoding of {len(data)} bytes")


@dataclass
class Signature:
    """ECDSA pair; sign() emits r, s in [1, n-1] with s in the low half."""

    r: int
    s: int


def secret_from_code(code: BinaryCode) -> bytes:
    """Canonical 32-byte big-endian packing of a 256-bit code."""
    if code.dim != 256:
        raise ValueError(f"secret material must be a 256-bit code, got {code.dim} bits")
    return code.to_bytes()


def pbkdf2_derive(password: bytes, salt: bytes, iterations: int) -> bytes:
    """PBKDF2-HMAC-SHA256, 32-byte output."""
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    return hashlib.pbkdf2_hmac("sha256", password, salt, iterations, dklen=32)


def derive_private_key(
    code: BinaryCode,
    password: Optional[bytes] = None,
    salt: bytes = DEFAULT_SALT,
    iterations: int = DEFAULT_ITERATIONS,
) -> PrivateKey:
    """Turn a 256-bit code (optionally bound to a password) into a valid scalar.

    Without a password the code bytes are the scalar directly. With one, the
    code is concatenated with the PBKDF2-stretched password and hashed down to
    scalar width. A zero or >= n candidate is remapped through SHA-256 into
    [1, n-1], so every code maps to exactly one usable key. An empty password
    is a real password, distinct from no password.
    """
    secret = secret_from_code(code)
    if password is None:
        base = secret
        candidate = int.from_bytes(secret, "big")
    else:
        base = secret + pbkdf2_derive(password, salt, iterations)
        candidate = int.from_bytes(hashlib.sha256(base).digest(), "big")
    if candidate == 0 or candidate >= N:
        candidate = int.from_bytes(hashlib.sha256(base).digest(), "big") % (N - 1) + 1
    return PrivateKey(candidate)


def derive_public_key(priv: PrivateKey) -> PublicKey:
    point = _point_mul(priv.d, G)
    assert point is not None  # d in [1, n-1] never hits infinity
    return PublicKey(point[0], point[1])


def _sha256d(data: bytes) -> bytes:
    return hashlib.sha256(hashlib.sha256(data).digest()).digest()


def _nonce(d: int, digest: bytes):
    """Deterministic nonce stream from HMAC-SHA256 chaining of key and digest.

    Follows the standard derandomized-ECDSA construction; with a 256-bit group
    order and 32-byte digests the bits2int/bits2octets steps collapse to plain
    big-endian conversions (reduced mod n for the octet form).
    """
    x = d.to_bytes(32, "big")
    h1 = (int.from_bytes(digest, "big") % N).to_bytes(32, "big")
    v = b"\x01" * 32
    k = b"\x00" * 32
    k = hmac.new(k, v + b"\x00" + x + h1, hashlib.sha256).digest()
    v = hmac.new(k, v, hashlib.sha256).digest()
    k = hmac.new(k, v + b"\x01" + x + h1, hashlib.sha256).digest()
    v = hmac.new(k, v, hashlib.sha256).digest()
    while True:
        v = hmac.new(k, v, hashlib.sha256).digest()
        candidate = int.from_bytes(v, "big")
        if 1 <= candidate < N:
            yield candidate
        k = hmac.new(k, v + b"\x00", hashlib.sha256).digest()
        v = hmac.new(k, v, hashlib.sha256).digest()


def sign(priv: PrivateKey, message: bytes) -> Signature:
    """Deterministic ECDSA over SHA256D(message) with canonical low-s."""
    digest = _sha256d(message)
    z = int.from_bytes(digest, "big")
    for k in _nonce(priv.d, digest):
        point = _point_mul(k, G)
        assert point is not None
        r = point[0] % N
        if r == 0:
            continue
        s = pow(k, -1, N) * (z + r * priv.d) % N
        if s == 0:
            continue
        if s > N // 2:
            s = N - s
        return Signature(r, s)
    raise AssertionError("unreachable: nonce stream is infinite")


def verify(pub: PublicKey, message: bytes, sig: Signature) -> bool:
    """Standard ECDSA verification over SHA256D(message).

    Returns False for out-of-range r or s rather than raising; an off-curve
    public key cannot be constructed in the first place.
    """
    if not _on_curve(pub.x, pub.y):
        raise ValueError("public key is not on the curve")
    if not (1 <= sig.r <= N - 1 and 1 <= sig.s <= N - 1):
        return False
    z = int.from_bytes(_sha256d(message), "big")
    w = pow(sig.s, -1, N)
    u1 = z * w % N
    u2 = sig.r * w % N
    point = _point_add(_point_mul(u1, G), _point_mul(u2, (pub.x, pub.y)))
    if point is None:
        return False
    return point[0] % N == sig.r
