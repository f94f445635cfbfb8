"""Formatting, authentication and encryption composed in every order, with
the validation-oracle attacks that separate the leaky orders from the safe
ones, and CCM with a replay-checking session on top."""

from .bitcore import BitString, Block, flip_bits, join_blocks, split_blocks, xor
from .formatting import INVALID, FormatRule, format_text, validate
from .schemes import CipherMode, Order, Scheme, SchemeConfig, WireMessage
from .aead_ccm import CcmParams, ccm_decrypt, ccm_encrypt
from .oracle import Oracle, OracleMode, Response
from .session import Session, audit

__all__ = [
    "BitString", "Block", "flip_bits", "join_blocks", "split_blocks", "xor",
    "INVALID", "FormatRule", "format_text", "validate",
    "CipherMode", "Order", "Scheme", "SchemeConfig", "WireMessage",
    "CcmParams", "ccm_decrypt", "ccm_encrypt",
    "Oracle", "OracleMode", "Response",
    "Session", "audit",
]
