"""The receiver seen from the attacker's side.

A leaky receiver names the failing check and stops at it. A strict one
runs every check, answers only ACCEPT or REJECT, and so costs the same
for every rejection. Cost is counted in abstract units, not time.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .schemes import Meter, Outcome, Scheme, SchemeConfig, WireMessage


class OracleMode(enum.Enum):
    LEAKY = "leaky"
    STRICT = "strict"


class Response(enum.Enum):
    ACCEPT = "ACCEPT"
    INVALID = "INVALID"
    MAC_FAILURE = "MAC_FAILURE"
    REJECT = "REJECT"

    @property
    def accepted(self) -> bool:
        return self is Response.ACCEPT


_LEAKY = {
    Outcome.ACCEPT: Response.ACCEPT,
    Outcome.INVALID: Response.INVALID,
    Outcome.MAC_FAILURE: Response.MAC_FAILURE,
}


@dataclass(frozen=True)
class Observation:
    symbol: Response
    cost: int
    query_index: int

    def signature(self) -> tuple[Response, int]:
        return self.symbol, self.cost


class Oracle:
    """Holds the scheme's keys and answers attacker queries."""

    def __init__(self, scheme: Scheme, mode: OracleMode | str = OracleMode.LEAKY):
        self.scheme = scheme
        self.mode = OracleMode(mode)
        self.queries = 0
        self.transcript: list[Response] = []

    @property
    def config(self) -> SchemeConfig:
        return self.scheme.config

    def query(self, w: WireMessage) -> Observation:
        meter = Meter()
        strict = self.mode is OracleMode.STRICT
        result = self.scheme.open(w, eager=strict, meter=meter)
        if strict:
            symbol = Response.ACCEPT if result.accepted else Response.REJECT
        else:
            symbol = _LEAKY[result.outcome]
        obs = Observation(symbol, meter.cost, self.queries)
        self.queries += 1
        self.transcript.append(symbol)
        return obs

    __call__ = query


def oracle_query(oracle: Oracle, w: WireMessage) -> Observation:
    return oracle.query(w)
