"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field, model_validator


class EmbeddingDoc(BaseModel):
    dim: int = Field(gt=0)
    values: list[float]

    @model_validator(mode="after")
    def _lengths_match(self):
        if len(self.values) != self.dim:
            raise ValueError(f"values: expected {self.dim} entries, found {len(self.values)}")
        return self


class CodeDoc(BaseModel):
    dim: int = Field(gt=0)
    hex: str


class EmbedRequest(BaseModel):
    values: list[float]


class DistanceRequest(BaseModel):
    a: EmbeddingDoc
    b: EmbeddingDoc
    binary: bool = False


class DistanceResponse(BaseModel):
    metric: str
    value: float


class DeriveRequest(BaseModel):
    embedding: Optional[EmbeddingDoc] = None
    code_hex: Optional[str] = None
    passphrase: Optional[str] = None
    salt: str = "embedkey-v1"
    iterations: int = Field(default=100_000, ge=1)
    compressed: bool = False
    version: int = Field(default=0, ge=0, le=255)

    @model_validator(mode="after")
    def _one_source(self):
        if (self.embedding is None) == (self.code_hex is None):
            raise ValueError("provide exactly one of embedding or code_hex")
        return self


class DeriveResponse(BaseModel):
    code_hex: str
    private_key_hex: str
    wif: str
    public_key_hex: str
    address: str


class AddressRequest(BaseModel):
    pubkey_hex: str
    compressed: Optional[bool] = None  # None hashes the key exactly as given
    version: int = Field(default=0, ge=0, le=255)


class AddressResponse(BaseModel):
    address: str


class FundRequest(BaseModel):
    address: str
    amount: int


class FundResponse(BaseModel):
    txid: str
    vout: int
    balance: int


class SignatureDoc(BaseModel):
    r: str  # 64 hex chars
    s: str


class SighashRequest(BaseModel):
    txid: str
    vout: int = Field(ge=0)
    destination: str
    amount: int
    pubkey_hex: str


class SighashResponse(BaseModel):
    sighash_hex: str


class RedeemRequest(BaseModel):
    txid: str
    vout: int = Field(ge=0)
    destination: str
    amount: int
    pubkey_hex: str
    signature: SignatureDoc


class RedeemFromEmbeddingRequest(BaseModel):
    txid: str
    vout: int = Field(ge=0)
    destination: str
    embedding: EmbeddingDoc
    passphrase: Optional[str] = None
    salt: str = "embedkey-v1"
    iterations: int = Field(default=100_000, ge=1)
    compressed: bool = False


class RedeemResponse(BaseModel):
    accepted: bool
    reason: Optional[str] = None
    txid: Optional[str] = None


class BalanceResponse(BaseModel):
    address: str
    balance: int


class UtxoDoc(BaseModel):
    txid: str
    vout: int
    amount: int
    address: str


class LedgerDoc(BaseModel):
    utxos: list[UtxoDoc]
    history: list[dict]


class HealthResponse(BaseModel):
    status: str
    model_loaded: bool
