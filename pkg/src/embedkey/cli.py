"""Command-line front door: thin wrappers over the library, one command per run.

Machine-readable output goes to stdout as JSON (the binarize command prints a
bare hex string); diagnostics go to stderr. Exit codes: 0 success, 1 domain
error, 2 usage error. Every command is deterministic given its flags and
input files; this process never touches the network.
"""

from __future__ import annotations

import argparse
import getpass
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import keys, ledger as ledger_mod, metricnet as mn
from .address import Address, p2pkh_address
from .embedding import Embedding, binarize, euclidean_dist2, hamming, read_embedding, write_embedding
from .errors import FormatError
from .keys import PublicKey
from .pipeline import derive_identity

_SEED_ENV = "EMBEDKEY_SEED"


def _default_seed(fallback: int = 0) -> int:
    raw = os.environ.get(_SEED_ENV)
    if raw is None:
        return fallback
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{_SEED_ENV} must be an integer, got {raw!r}") from None


def _emit(doc) -> None:
    print(json.dumps(doc, indent=2))


def _read_vector(path) -> np.ndarray:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"document: invalid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise FormatError("document: expected a JSON object")
    dim = doc.get("dim")
    values = doc.get("values")
    if not isinstance(dim, int) or dim <= 0:
        raise FormatError(f"dim: expected a positive integer, found {dim!r}")
    if not isinstance(values, list) or len(values) != dim:
        raise FormatError(f"values: expected a list of {dim} numbers")
    return np.array(values, dtype=np.float64)


def _parse_byte(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value <= 255:
        raise ValueError(f"version byte must lie in [0, 255], got {text}")
    return value


def _parse_hidden(text: str) -> list[int]:
    if text.strip() == "":
        return []
    return [int(part) for part in text.split(",")]


def _passphrase_bytes(args) -> bytes | None:
    if args.passphrase is not None:
        return args.passphrase.encode("utf-8")
    if getattr(args, "passphrase_prompt", False):
        if not sys.stdin.isatty():
            raise ValueError("passphrase prompt is unavailable in non-interactive mode")
        return getpass.getpass("passphrase: ").encode("utf-8")
    return None


def _add_kdf_flags(sub):
    sub.add_argument("--passphrase", help="bind the key to this passphrase")
    sub.add_argument(
        "--passphrase-prompt",
        action="store_true",
        help="prompt for the passphrase (interactive terminals only)",
    )
    sub.add_argument("--salt", default="embedkey-v1", help="PBKDF2 salt")
    sub.add_argument("--iterations", type=int, default=keys.DEFAULT_ITERATIONS, help="PBKDF2 iterations")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embedkey",
        description="Derive key pairs and P2PKH addresses from binarized embeddings.",
    )
    subs = parser.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    p = subs.add_parser("train", help="train an embedding model on synthetic data", formatter_class=fmt)
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--per-class", type=int, default=20)
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--seed", type=int, default=None, help=f"PRNG seed (default ${_SEED_ENV} or 0)")
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--hidden", type=_parse_hidden, default=[128], help="comma-separated hidden widths")
    p.add_argument("--embed-dim", type=int, default=256)
    p.add_argument("--noise-sigma", type=float, default=0.15)
    p.add_argument("--m1", type=float, default=0.25, help="genuine-pair margin")
    p.add_argument("--m2", type=float, default=1.5, help="impostor-pair margin")
    p.add_argument("--lambda", dest="lam", type=float, default=0.1, help="regularizer weight")
    p.add_argument("--learning-rate", type=float, default=0.05)
    p.add_argument("--pairs-per-epoch", type=int, default=128)
    p.add_argument("--genuine-fraction", type=float, default=0.5)

    p = subs.add_parser("embed", help="forward-pass an input vector through a model", formatter_class=fmt)
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True, help="input vector file {dim, values}")
    p.add_argument("--out", help="embedding file to write (otherwise printed)")

    p = subs.add_parser("binarize", help="print the hex code of an embedding", formatter_class=fmt)
    p.add_argument("--embedding", required=True)

    p = subs.add_parser("derive", help="embedding -> key pair -> address", formatter_class=fmt)
    p.add_argument("--embedding", required=True)
    _add_kdf_flags(p)
    p.add_argument("--wif", action="store_true", help="also print the WIF export")
    p.add_argument("--compressed", action="store_true", help="use the compressed public key")
    p.add_argument("--version", type=_parse_byte, default="0x00", help="address version byte")

    p = subs.add_parser("address", help="address of a serialized public key", formatter_class=fmt)
    p.add_argument("--pubkey", required=True, help="SEC public key, hex")
    p.add_argument("--compressed", action="store_true", help="re-serialize compressed before hashing")
    p.add_argument("--version", type=_parse_byte, default="0x00", help="address version byte")

    p = subs.add_parser("fund", help="add value at an address on the ledger", formatter_class=fmt)
    p.add_argument("--ledger", required=True, help="ledger file (created if missing)")
    p.add_argument("--address", required=True)
    p.add_argument("--amount", type=int, required=True)

    p = subs.add_parser("redeem", help="spend a UTXO with a key derived from an embedding", formatter_class=fmt)
    p.add_argument("--ledger", required=True)
    p.add_argument("--txid", required=True)
    p.add_argument("--vout", type=int, default=0)
    p.add_argument("--dest", required=True, help="destination address")
    p.add_argument("--embedding", required=True)
    _add_kdf_flags(p)
    p.add_argument("--compressed", action="store_true", help="present the compressed public key")

    p = subs.add_parser("distance", help="distance between two embeddings", formatter_class=fmt)
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--binary", action="store_true", help="Hamming distance of the binarized codes")

    p = subs.add_parser("report", help="per-class mean-distance matrix on synthetic data", formatter_class=fmt)
    p.add_argument("--model", required=True)
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--per-class", type=int, default=20)
    p.add_argument("--seed", type=int, default=None, help=f"PRNG seed (default ${_SEED_ENV} or 0)")
    p.add_argument("--noise-sigma", type=float, default=0.15)

    return parser


def _cmd_train(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    data = mn.gen_synthetic_dataset(seed, args.classes, args.per_class, args.dim, args.noise_sigma)
    model = mn.init_model(seed, args.dim, args.hidden, args.embed_dim)
    hp = mn.HyperParams(
        m1=args.m1,
        m2=args.m2,
        lam=args.lam,
        learning_rate=args.learning_rate,
        epochs=args.epochs,
        seed=seed,
    )
    trained, history = mn.train(
        model,
        data,
        hp,
        pairs_per_epoch=args.pairs_per_epoch,
        genuine_fraction=args.genuine_fraction,
    )
    mn.save_model(trained, args.out)
    _emit(
        {
            "model": args.out,
            "epochs": args.epochs,
            "initial_objective": history[0] if history else None,
            "final_objective": history[-1] if history else None,
        }
    )
    return 0


def _cmd_embed(args) -> int:
    model = mn.load_model(args.model)
    vec = _read_vector(args.input)
    _, emb = mn.forward(model, vec)
    if args.out:
        write_embedding(emb, args.out)
        _emit({"out": args.out, "dim": emb.dim})
    else:
        _emit({"dim": emb.dim, "values": [float(v) for v in emb.values]})
    return 0


def _cmd_binarize(args) -> int:
    print(binarize(read_embedding(args.embedding)).to_hex())
    return 0


def _cmd_derive(args) -> int:
    ident = derive_identity(
        read_embedding(args.embedding),
        passphrase=_passphrase_bytes(args),
        salt=args.salt.encode("utf-8"),
        iterations=args.iterations,
        compressed=args.compressed,
        version=args.version,
    )
    doc = {
        "private_key_hex": ident.private_key.hex(),
        "public_key_hex": ident.public_key_bytes.hex(),
        "address": ident.address.text,
    }
    if args.wif:
        doc["wif"] = ident.wif
    _emit(doc)
    return 0


def _cmd_address(args) -> int:
    pub = PublicKey.parse(bytes.fromhex(args.pubkey))
    compressed = args.compressed or len(bytes.fromhex(args.pubkey)) == 33
    _emit({"address": p2pkh_address(pub, compressed, args.version).text})
    return 0


def _load_or_new_ledger(path) -> ledger_mod.Ledger:
    if Path(path).exists():
        return ledger_mod.load_ledger(path)
    return ledger_mod.new_ledger()


def _cmd_fund(args) -> int:
    led = _load_or_new_ledger(args.ledger)
    address = Address.from_text(args.address)
    txid = ledger_mod.fund(led, address, args.amount)
    ledger_mod.save_ledger(led, args.ledger)
    _emit({"txid": txid, "vout": 0, "balance": ledger_mod.balance(led, address)})
    return 0


def _cmd_redeem(args) -> int:
    led = ledger_mod.load_ledger(args.ledger)
    dest = Address.from_text(args.dest)
    ident = derive_identity(
        read_embedding(args.embedding),
        passphrase=_passphrase_bytes(args),
        salt=args.salt.encode("utf-8"),
        iterations=args.iterations,
        compressed=args.compressed,
    )
    utxo = led.utxos.get((args.txid, args.vout))
    amount = utxo.amount if utxo is not None else 0
    pubkey = ident.public_key_bytes
    digest = ledger_mod.sighash(args.txid, args.vout, dest, amount, pubkey)
    tx = ledger_mod.RedeemTx(
        txid=args.txid,
        vout=args.vout,
        destination=dest,
        amount=amount,
        pubkey=pubkey,
        signature=keys.sign(ident.private_key, digest),
    )
    result = ledger_mod.redeem(led, tx)
    if result.accepted:
        ledger_mod.save_ledger(led, args.ledger)
        _emit({"accepted": True, "txid": result.txid})
        return 0
    _emit({"accepted": False, "reason": result.reason})
    print(f"redeem rejected: {result.reason}", file=sys.stderr)
    return 1


def _cmd_distance(args) -> int:
    ea, eb = read_embedding(args.a), read_embedding(args.b)
    if args.binary:
        _emit({"metric": "hamming", "value": hamming(binarize(ea), binarize(eb))})
    else:
        _emit({"metric": "squared-l2", "value": euclidean_dist2(ea, eb)})
    return 0


def _cmd_report(args) -> int:
    model = mn.load_model(args.model)
    seed = args.seed if args.seed is not None else _default_seed()
    data = mn.gen_synthetic_dataset(seed, args.classes, args.per_class, model.input_dim, args.noise_sigma)
    embeddings = np.stack([mn.forward(model, v)[1].values for v in data.vectors])
    matrix = []
    for i in range(args.classes):
        zi = embeddings[data.class_ids == i]
        row = []
        for j in range(args.classes):
            zj = embeddings[data.class_ids == j]
            d2 = np.sum((zi[:, None, :] - zj[None, :, :]) ** 2, axis=2)
            if i == j:
                # distinct pairs only
                total = d2.sum() / (len(zi) * (len(zi) - 1))
            else:
                total = d2.mean()
            row.append(float(total))
        matrix.append(row)
    _emit({"classes": args.classes, "mean_distance": matrix})
    return 0


_HANDLERS = {
    "train": _cmd_train,
    "embed": _cmd_embed,
    "binarize": _cmd_binarize,
    "derive": _cmd_derive,
    "address": _cmd_address,
    "fund": _cmd_fund,
    "redeem": _cmd_redeem,
    "distance": _cmd_distance,
    "report": _cmd_report,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse handles usage errors and --help
        return int(exc.code or 0)
    try:
        return _HANDLERS[args.command](args)
    except FileNotFoundError as exc:
        print(f"file not found: {exc.filename or exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(str(exc), file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
