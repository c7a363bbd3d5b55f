"""Omniprediction via simultaneous approachability."""

from ._omnipred import (
    ConfigError,
    ContractError,
    binary_cmloo,
    build_net,
    default_horizon,
    generate,
    impossibility_demo,
    oracle_suites,
    run_binary_online,
    run_binary_stat,
    run_multiclass_online,
    run_multiclass_stat,
    run_union,
    solve_matrix_game,
    verify_isotonic,
)

__all__ = [
    "ConfigError",
    "ContractError",
    "binary_cmloo",
    "build_net",
    "default_horizon",
    "generate",
    "impossibility_demo",
    "oracle_suites",
    "run_binary_online",
    "run_binary_stat",
    "run_multiclass_online",
    "run_multiclass_stat",
    "run_union",
    "solve_matrix_game",
    "verify_isotonic",
]
