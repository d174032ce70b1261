"""Public-key encryption, identification and signatures from planted k-SAT instances."""

from .anf import AnfPoly, AnfSizeError, anf_and, anf_eval, anf_xor, negated_clause_anf, random_anf, truncate
from .cipher import (HonestCiphertext, RejectedCiphertext, TupleSelection, decrypt_bit,
                     decrypt_verify, encrypt_bit, encrypt_message, message_transform, select_tuples)
from .keys import Clause, Params, PrivateKey, PublicKey, encoded_key_bits, export_dimacs, keygen
from .prng import DeterministicRng, commit, derive_seed, verify_opening

__version__ = "0.1.0"
