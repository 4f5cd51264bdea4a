"""Cardinal direction and qualitative distance reasoning over grid regions."""

from ._core import (
    CdcError,
    Network,
    ParseError,
    SolveResult,
    boundary_distance,
    cdc_relation,
    compose,
    distance_name,
    enumerate_regions,
    infer_missing,
    inverse,
    oracle_solve,
    parse_network,
    solve,
)

__all__ = [
    "CdcError",
    "Network",
    "ParseError",
    "SolveResult",
    "boundary_distance",
    "cdc_relation",
    "compose",
    "distance_name",
    "enumerate_regions",
    "infer_missing",
    "inverse",
    "oracle_solve",
    "parse_network",
    "solve",
]
