"""FastAPI service wrapping the core library.

The service holds one ledger (optionally persisted to a file after each
mutation) and, when configured with a model file, serves forward passes.
Domain errors surface as HTTP 400; a rejected redeem is a normal 200 response
with ``accepted`` false, since rejection is a ledger outcome, not an error.

Run with: EMBEDKEY_MODEL=model.json EMBEDKEY_LEDGER=ledger.json \
    uvicorn embedkey.service:app
"""

from __future__ import annotations

import os
import threading
from typing import Optional

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import keys, ledger as ledger_mod, metricnet as mn
from ..address import Address, p2pkh_address, wif_encode
from ..embedding import BinaryCode, Embedding, binarize, euclidean_dist2, hamming
from ..keys import PublicKey, Signature
from ..pipeline import derive_identity
from . import schemas as s

__all__ = ["create_app", "app"]


def _to_embedding(doc: s.EmbeddingDoc) -> Embedding:
    return Embedding(np.array(doc.values, dtype=np.float64))


def create_app(model_path: Optional[str] = None, ledger_path: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="embedkey", version="0.1.0")
    app.state.model = mn.load_model(model_path) if model_path else None
    if ledger_path and os.path.exists(ledger_path):
        app.state.ledger = ledger_mod.load_ledger(ledger_path)
    else:
        app.state.ledger = ledger_mod.new_ledger()
    app.state.ledger_path = ledger_path
    app.state.lock = threading.Lock()  # ledger mutation is single-writer

    @app.exception_handler(ValueError)
    async def _domain_error(_req: Request, exc: ValueError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    def _persist():
        if app.state.ledger_path:
            ledger_mod.save_ledger(app.state.ledger, app.state.ledger_path)

    @app.get("/health", response_model=s.HealthResponse)
    def health():
        return s.HealthResponse(status="ok", model_loaded=app.state.model is not None)

    @app.post("/model/embed", response_model=s.EmbeddingDoc)
    def embed(req: s.EmbedRequest):
        if app.state.model is None:
            return JSONResponse(status_code=409, content={"detail": "no model loaded"})
        _, emb = mn.forward(app.state.model, np.array(req.values, dtype=np.float64))
        return s.EmbeddingDoc(dim=emb.dim, values=[float(v) for v in emb.values])

    @app.post("/embeddings/binarize", response_model=s.CodeDoc)
    def binarize_embedding(req: s.EmbeddingDoc):
        code = binarize(_to_embedding(req))
        return s.CodeDoc(dim=code.dim, hex=code.to_hex())

    @app.post("/embeddings/distance", response_model=s.DistanceResponse)
    def distance(req: s.DistanceRequest):
        ea, eb = _to_embedding(req.a), _to_embedding(req.b)
        if req.binary:
            return s.DistanceResponse(metric="hamming", value=float(hamming(binarize(ea), binarize(eb))))
        return s.DistanceResponse(metric="squared-l2", value=euclidean_dist2(ea, eb))

    @app.post("/keys/derive", response_model=s.DeriveResponse)
    def derive(req: s.DeriveRequest):
        passphrase = req.passphrase.encode("utf-8") if req.passphrase is not None else None
        salt = req.salt.encode("utf-8")
        if req.embedding is not None:
            ident = derive_identity(
                _to_embedding(req.embedding),
                passphrase=passphrase,
                salt=salt,
                iterations=req.iterations,
                compressed=req.compressed,
                version=req.version,
            )
            code, priv, pub = ident.code, ident.private_key, ident.public_key
            address = ident.address
        else:
            code = BinaryCode.from_hex(req.code_hex)
            priv = keys.derive_private_key(code, passphrase, salt, req.iterations)
            pub = keys.derive_public_key(priv)
            address = p2pkh_address(pub, req.compressed, req.version)
        return s.DeriveResponse(
            code_hex=code.to_hex(),
            private_key_hex=priv.hex(),
            wif=wif_encode(priv, req.compressed),
            public_key_hex=pub.serialize(req.compressed).hex(),
            address=address.text,
        )

    @app.post("/address", response_model=s.AddressResponse)
    def address_from_pubkey(req: s.AddressRequest):
        raw = bytes.fromhex(req.pubkey_hex)
        pub = PublicKey.parse(raw)
        compressed = len(raw) == 33 if req.compressed is None else req.compressed
        return s.AddressResponse(address=p2pkh_address(pub, compressed, req.version).text)

    @app.post("/ledger/fund", response_model=s.FundResponse)
    def fund(req: s.FundRequest):
        address = Address.from_text(req.address)
        with app.state.lock:
            txid = ledger_mod.fund(app.state.ledger, address, req.amount)
            _persist()
            bal = ledger_mod.balance(app.state.ledger, address)
        return s.FundResponse(txid=txid, vout=0, balance=bal)

    @app.post("/ledger/sighash", response_model=s.SighashResponse)
    def sighash(req: s.SighashRequest):
        digest = ledger_mod.sighash(
            req.txid, req.vout, Address.from_text(req.destination), req.amount, bytes.fromhex(req.pubkey_hex)
        )
        return s.SighashResponse(sighash_hex=digest.hex())

    @app.post("/ledger/redeem", response_model=s.RedeemResponse)
    def redeem(req: s.RedeemRequest):
        tx = ledger_mod.RedeemTx(
            txid=req.txid,
            vout=req.vout,
            destination=Address.from_text(req.destination),
            amount=req.amount,
            pubkey=bytes.fromhex(req.pubkey_hex),
            signature=Signature(r=int(req.signature.r, 16), s=int(req.signature.s, 16)),
        )
        with app.state.lock:
            result = ledger_mod.redeem(app.state.ledger, tx)
            if result.accepted:
                _persist()
        return s.RedeemResponse(accepted=result.accepted, reason=result.reason, txid=result.txid)

    @app.post("/ledger/redeem-from-embedding", response_model=s.RedeemResponse)
    def redeem_from_embedding(req: s.RedeemFromEmbeddingRequest):
        ident = derive_identity(
            _to_embedding(req.embedding),
            passphrase=req.passphrase.encode("utf-8") if req.passphrase is not None else None,
            salt=req.salt.encode("utf-8"),
            iterations=req.iterations,
            compressed=req.compressed,
        )
        destination = Address.from_text(req.destination)
        with app.state.lock:
            utxo = app.state.ledger.utxos.get((req.txid, req.vout))
            amount = utxo.amount if utxo is not None else 0
            pubkey = ident.public_key_bytes
            digest = ledger_mod.sighash(req.txid, req.vout, destination, amount, pubkey)
            tx = ledger_mod.RedeemTx(
                txid=req.txid,
                vout=req.vout,
                destination=destination,
                amount=amount,
                pubkey=pubkey,
                signature=keys.sign(ident.private_key, digest),
            )
            result = ledger_mod.redeem(app.state.ledger, tx)
            if result.accepted:
                _persist()
        return s.RedeemResponse(accepted=result.accepted, reason=result.reason, txid=result.txid)

    @app.get("/ledger/balance/{address}", response_model=s.BalanceResponse)
    def balance(address: str):
        addr = Address.from_text(address)
        return s.BalanceResponse(address=address, balance=ledger_mod.balance(app.state.ledger, addr))

    @app.get("/ledger", response_model=s.LedgerDoc)
    def ledger_state():
        led = app.state.ledger
        return s.LedgerDoc(
            utxos=[
                s.UtxoDoc(txid=u.txid, vout=u.vout, amount=u.amount, address=u.address.text)
                for u in sorted(led.utxos.values(), key=lambda u: (u.txid, u.vout))
            ],
            history=led.history,
        )

    return app


app = create_app(os.environ.get("EMBEDKEY_MODEL"), os.environ.get("EMBEDKEY_LEDGER"))
