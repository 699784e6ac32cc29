"""Miniature in-memory UTXO ledger with P2PKH semantics.

Funds sent to an address can be redeemed only by presenting a public key
whose hash160 equals the address payload plus a valid signature over the
transaction's sighash. Zero fees, single input, single output, no blocks:
the ledger is just a UTXO set plus an append-only history, so value is
conserved and nothing can be spent twice.

Canonical byte layouts (fixed so ids are platform-independent):
  fund txid   = SHA256D(ascii "ADDRESS|AMOUNT|HISTORY_LENGTH")
  sighash     = SHA256D(ascii "TXID:VOUT|DEST|AMOUNT|PUBKEYHEX")
  redeem txid = SHA256D(sighash || r_32be || s_32be)
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .address import Address, hash160, sha256d
from .errors import FormatError
from .keys import PublicKey, Signature, verify

__all__ = [
    "Utxo",
    "RedeemTx",
    "RedeemResult",
    "Ledger",
    "REJECT_REASONS",
    "new_ledger",
    "fund",
    "sighash",
    "redeem",
    "balance",
    "save_ledger",
    "load_ledger",
]

REJECT_REASONS = (
    "unknown-input",
    "double-spend",
    "pubkey-hash-mismatch",
    "bad-signature",
    "amount-mismatch",
)


@dataclass(frozen=True)
class Utxo:
    txid: str  # 64 lowercase hex chars
    vout: int
    amount: int
    address: Address


@dataclass(frozen=True)
class RedeemTx:
    txid: str
    vout: int
    destination: Address
    amount: int
    pubkey: bytes
    signature: Signature


@dataclass(frozen=True)
class RedeemResult:
    accepted: bool
    reason: Optional[str] = None  # one of REJECT_REASONS when rejected
    txid: Optional[str] = None  # id of the created output when accepted


@dataclass
class Ledger:
    utxos: dict[tuple[str, int], Utxo] = field(default_factory=dict)
    history: list[dict] = field(default_factory=list)
    spent: set[tuple[str, int]] = field(default_factory=set)

    def __eq__(self, other):
        if not isinstance(other, Ledger):
            return NotImplemented
        return (self.utxos, self.history, self.spent) == (other.utxos, other.history, other.spent)


def new_ledger() -> Ledger:
    return Ledger()


def fund(ledger: Ledger, address: Address, amount: int) -> str:
    """Append a coinbase-style UTXO for ``amount`` at ``address``; returns its txid."""
    if not isinstance(amount, int) or isinstance(amount, bool) or amount <= 0:
        raise ValueError(f"amount must be a positive integer, got {amount!r}")
    Address.from_text(address.text)  # must decode validly
    preimage = f"{address.text}|{amount}|{len(ledger.history)}".encode("ascii")
    txid = sha256d(preimage).hex()
    utxo = Utxo(txid=txid, vout=0, amount=amount, address=address)
    ledger.utxos[(txid, 0)] = utxo
    ledger.history.append(
        {"type": "fund", "txid": txid, "vout": 0, "amount": amount, "address": address.text}
    )
    return txid


def sighash(txid: str, vout: int, destination: Address, amount: int, pubkey: bytes) -> bytes:
    """Digest a redeem transaction's signable fields."""
    preimage = f"{txid}:{vout}|{destination.text}|{amount}|{pubkey.hex()}".encode("ascii")
    return sha256d(preimage)


def redeem(ledger: Ledger, tx: RedeemTx) -> RedeemResult:
    """Validate and apply a redeem; rejections never mutate the ledger.

    Accepted iff the input exists unspent, the presented pubkey hashes to the
    input's address payload, the signature verifies over the sighash, and the
    amount matches exactly (zero-fee model).
    """
    key = (tx.txid, tx.vout)
    if key not in ledger.utxos:
        reason = "double-spend" if key in ledger.spent else "unknown-input"
        return RedeemResult(accepted=False, reason=reason)
    utxo = ledger.utxos[key]
    if hash160(tx.pubkey) != utxo.address.payload:
        return RedeemResult(accepted=False, reason="pubkey-hash-mismatch")
    digest = sighash(tx.txid, tx.vout, tx.destination, tx.amount, tx.pubkey)
    try:
        pub = PublicKey.parse(tx.pubkey)
    except ValueError:
        return RedeemResult(accepted=False, reason="bad-signature")
    if not verify(pub, digest, tx.signature):
        return RedeemResult(accepted=False, reason="bad-signature")
    if tx.amount != utxo.amount:
        return RedeemResult(accepted=False, reason="amount-mismatch")
    new_txid = sha256d(
        digest + tx.signature.r.to_bytes(32, "big") + tx.signature.s.to_bytes(32, "big")
    ).hex()
    del ledger.utxos[key]
    ledger.spent.add(key)
    ledger.utxos[(new_txid, 0)] = Utxo(
        txid=new_txid, vout=0, amount=tx.amount, address=tx.destination
    )
    ledger.history.append(
        {
            "type": "redeem",
            "input": {"txid": tx.txid, "vout": tx.vout},
            "destination": tx.destination.text,
            "amount": tx.amount,
            "pubkey": tx.pubkey.hex(),
            "signature": {"r": f"{tx.signature.r:064x}", "s": f"{tx.signature.s:064x}"},
            "txid": new_txid,
        }
    )
    return RedeemResult(accepted=True, txid=new_txid)


def balance(ledger: Ledger, address: Address) -> int:
    return sum(u.amount for u in ledger.utxos.values() if u.address == address)


def total_supply(ledger: Ledger) -> int:
    return sum(u.amount for u in ledger.utxos.values())


def save_ledger(ledger: Ledger, path) -> None:
    doc = {
        "utxos": [
            {"txid": u.txid, "vout": u.vout, "amount": u.amount, "address": u.address.text}
            for u in sorted(ledger.utxos.values(), key=lambda u: (u.txid, u.vout))
        ],
        "history": ledger.history,
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_ledger(path) -> Ledger:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"document: invalid JSON ({exc})") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("utxos"), list) or not isinstance(
        doc.get("history"), list
    ):
        raise FormatError("document: expected an object with utxos and history lists")
    ledger = Ledger()
    for i, raw in enumerate(doc["utxos"]):
        try:
            utxo = Utxo(
                txid=raw["txid"],
                vout=raw["vout"],
                amount=raw["amount"],
                address=Address.from_text(raw["address"]),
            )
        except (KeyError, TypeError) as exc:
            raise FormatError(f"utxos[{i}]: {exc}") from None
        ledger.utxos[(utxo.txid, utxo.vout)] = utxo
    ledger.history = list(doc["history"])
    # spent set is derivable: every input consumed by an accepted redeem
    for entry in ledger.history:
        if isinstance(entry, dict) and entry.get("type") == "redeem":
            inp = entry.get("input", {})
            ledger.spent.add((inp.get("txid"), inp.get("vout")))
    return ledger
