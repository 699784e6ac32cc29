"""End-to-end derivation: embedding -> code -> key pair -> address."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import keys
from .address import Address, p2pkh_address, wif_encode
from .embedding import BinaryCode, Embedding, binarize
from .keys import PrivateKey, PublicKey

__all__ = ["DerivedIdentity", "derive_identity"]


@dataclass(frozen=True)
class DerivedIdentity:
    code: BinaryCode
    private_key: PrivateKey
    public_key: PublicKey
    compressed: bool
    address: Address

    @property
    def public_key_bytes(self) -> bytes:
        return self.public_key.serialize(self.compressed)

    @property
    def wif(self) -> str:
        return wif_encode(self.private_key, self.compressed)


def derive_identity(
    embedding: Embedding,
    passphrase: Optional[bytes] = None,
    salt: bytes = keys.DEFAULT_SALT,
    iterations: int = keys.DEFAULT_ITERATIONS,
    compressed: bool = False,
    version: int = 0x00,
) -> DerivedIdentity:
    """Run the whole derivation chain for one embedding."""
    code = binarize(embedding)
    priv = keys.derive_private_key(code, passphrase, salt, iterations)
    pub = keys.derive_public_key(priv)
    return DerivedIdentity(
        code=code,
        private_key=priv,
        public_key=pub,
        compressed=compressed,
        address=p2pkh_address(pub, compressed, version),
    )
