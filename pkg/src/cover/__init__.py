"""
    Light-node collaborative block verification with coded data
    availability.

    The protocol library (`hashcommit`, `ldpc`, `cmt`, `ledger`,
    `protocol`) is usable on its own; `netsim`, `adversary` and `harness`
    simulate it and check its guarantees.
"""
import logging

from cover.cmt import CodedMerkleTree, SymbolId, build_tree, decode_tree_classical
from cover.errors import CoverError
from cover.harness import ScenarioConfig, run_scenario
from cover.ldpc import LdpcCode, construct_code, encode, peel_decode
from cover.ledger import Block, Header, HeaderChain, Transaction
from cover.protocol import ProtocolParams, ValidatorNode, Verdict, run_round

logging.getLogger(__name__).addHandler(logging.NullHandler())

__all__ = [
    "Block",
    "CodedMerkleTree",
    "CoverError",
    "Header",
    "HeaderChain",
    "LdpcCode",
    "ProtocolParams",
    "ScenarioConfig",
    "SymbolId",
    "Transaction",
    "ValidatorNode",
    "Verdict",
    "build_tree",
    "construct_code",
    "decode_tree_classical",
    "encode",
    "peel_decode",
    "run_round",
    "run_scenario",
]
