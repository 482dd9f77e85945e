"""Stochastic six-vertex model: exact transfer matrices, row sampler and limit-shape solver."""

from ._stovex import (
    BaxterPoint,
    FluxParams,
    StochasticWeights,
    asep_relation,
    column_sums,
    commutator_norm,
    compare_density,
    domain_wall,
    ensemble_density,
    evolve,
    example1,
    example2,
    example3,
    example3_y1,
    flux,
    front_track_profile,
    godunov,
    markov_block,
    rh_speed,
    run_config,
    speed,
    speed_inverse,
    transfer_block,
    weights_from_baxter,
    weights_from_probabilities,
)

__all__ = [
    "BaxterPoint",
    "FluxParams",
    "StochasticWeights",
    "asep_relation",
    "column_sums",
    "commutator_norm",
    "compare_density",
    "domain_wall",
    "ensemble_density",
    "evolve",
    "example1",
    "example2",
    "example3",
    "example3_y1",
    "flux",
    "front_track_profile",
    "godunov",
    "markov_block",
    "rh_speed",
    "run_config",
    "speed",
    "speed_inverse",
    "transfer_block",
    "weights_from_baxter",
    "weights_from_probabilities",
]
