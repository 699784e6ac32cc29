"""P2PKH address encoding: pubkey -> hash160 -> version byte -> Base58Check.

Also carries the WIF private-key export. Default version bytes are the
Bitcoin main-net constants (0x00 address, 0x80 WIF); nothing here ever talks
to a real network.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import TYPE_CHECKING

from ._ripemd160 import ripemd160
from .errors import ChecksumError, FormatError

if TYPE_CHECKING:
    from .keys import PrivateKey, PublicKey

__all__ = [
    "Address",
    "hash160",
    "sha256d",
    "b58encode",
    "b58decode",
    "base58check_encode",
    "base58check_decode",
    "p2pkh_address",
    "wif_encode",
    "wif_decode",
]

_B58_ALPHABET = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz"
_B58_INDEX = {c: i for i, c in enumerate(_B58_ALPHABET)}

VERSION_P2PKH = 0x00
VERSION_WIF = 0x80


def hash160(data: bytes) -> bytes:
    """RIPEMD-160 of SHA-256 of the input (20 bytes)."""
    return ripemd160(hashlib.sha256(data).digest())


def sha256d(data: bytes) -> bytes:
    """SHA-256 applied twice (32 bytes)."""
    return hashlib.sha256(hashlib.sha256(data).digest()).digest()


def b58encode(data: bytes) -> str:
    """Raw Base58; leading zero bytes become leading '1' characters."""
    n = int.from_bytes(data, "big")
    out = ""
    while n > 0:
        n, rem = divmod(n, 58)
        out = _B58_ALPHABET[rem] + out
    pad = len(data) - len(data.lstrip(b"\x00"))
    return "1" * pad + out


def b58decode(text: str) -> bytes:
    n = 0
    for ch in text:
        if ch not in _B58_INDEX:
            raise FormatError(f"text: invalid Base58 character {ch!r}")
        n = n * 58 + _B58_INDEX[ch]
    body = n.to_bytes((n.bit_length() + 7) // 8, "big")
    pad = len(text) - len(text.lstrip("1"))
    return b"\x00" * pad + body


def base58check_encode(version: int, payload: bytes) -> str:
    raw = bytes([version]) + payload
    return b58encode(raw + sha256d(raw)[:4])


def base58check_decode(text: str) -> tuple[int, bytes]:
    """Inverse of base58check_encode; checksum failures raise ChecksumError."""
    raw = b58decode(text)
    if len(raw) < 5:
        raise FormatError(f"text: decoded to {len(raw)} bytes, need version + checksum")
    body, checksum = raw[:-4], raw[-4:]
    if sha256d(body)[:4] != checksum:
        raise ChecksumError(f"checksum mismatch in {text!r}")
    return body[0], body[1:]


@dataclass(frozen=True)
class Address:
    """Version byte + 20-byte pubkey hash, plus its Base58Check text form."""

    version: int
    payload: bytes
    text: str

    @classmethod
    def from_parts(cls, version: int, payload: bytes) -> "Address":
        return cls(version=version, payload=payload, text=base58check_encode(version, payload))

    @classmethod
    def from_text(cls, text: str) -> "Address":
        version, payload = base58check_decode(text)
        if len(payload) != 20:
            raise FormatError(f"text: payload is {len(payload)} bytes, expected a 20-byte hash160")
        return cls(version=version, payload=payload, text=text)


def p2pkh_address(pub: "PublicKey", compressed: bool = False, version: int = VERSION_P2PKH) -> Address:
    """hash160 the serialized public key and wrap it in Base58Check."""
    return Address.from_parts(version, hash160(pub.serialize(compressed)))


def wif_encode(priv: "PrivateKey", compressed: bool = False) -> str:
    """Wallet Import Format: Base58Check of the key bytes under version 0x80,
    with a 0x01 suffix when the corresponding public key is compressed."""
    payload = priv.to_bytes() + (b"\x01" if compressed else b"")
    return base58check_encode(VERSION_WIF, payload)


def wif_decode(text: str) -> tuple[bytes, bool]:
    """Returns (32 secret bytes, compressed flag)."""
    version, payload = base58check_decode(text)
    if version != VERSION_WIF:
        raise FormatError(f"text: WIF version byte is {version:#04x}, expected 0x80")
    if len(payload) == 32:
        return payload, False
    if len(payload) == 33 and payload[-1] == 0x01:
        return payload[:32], True
    raise FormatError(f"text: WIF payload of {len(payload)} bytes is malformed")
