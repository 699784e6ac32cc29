"""embedkey: key pairs and P2PKH addresses derived from binarized embeddings.

A small siamese network learns embeddings whose squared L2 distance tracks
input similarity while a triangular activation regularizer pushes activations
toward {0,1}. Thresholding yields a 256-bit code that seeds a secp256k1 key
pair; the public key becomes a Base58Check address, and a local UTXO ledger
demonstrates funding and redeeming value bound to the embedding.
"""

from .address import Address, base58check_decode, base58check_encode, hash160, p2pkh_address, sha256d, wif_decode, wif_encode
from .embedding import (
    BinaryCode,
    Embedding,
    binarize,
    euclidean_dist2,
    hamming,
    neighbor_overlap,
    read_embedding,
    topk_neighbors,
    write_embedding,
)
from .errors import ChecksumError, FormatError
from .keys import (
    PrivateKey,
    PublicKey,
    Signature,
    derive_private_key,
    derive_public_key,
    pbkdf2_derive,
    secret_from_code,
    sign,
    verify,
)
from .ledger import Ledger, RedeemResult, RedeemTx, Utxo, balance, fund, load_ledger, new_ledger, redeem, save_ledger, sighash
from .metricnet import (
    HyperParams,
    Model,
    PairBatch,
    SyntheticDataset,
    batch_objective,
    contrastive_loss,
    forward,
    gen_synthetic_dataset,
    gradients,
    init_model,
    load_model,
    sample_pairs,
    save_model,
    split_dataset,
    train,
    triangular_reg,
)
from .pipeline import DerivedIdentity, derive_identity

__version__ = "0.1.0"
