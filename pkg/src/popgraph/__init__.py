"""Popularity-based power-law bipartite graphs and active fingerprinting attacks."""
from .bigraph import (INFINITE_ALPHA, BigraphParams, BipartiteGraph, Fingerprint, PopularityState,
                      fingerprint, generate, load_edge_list, sample_initial_popularities,
                      save_edge_list)
from .numerics import (ChannelSpec, bernoulli_channel_mi, binary_convolution, binary_entropy,
                       binary_kl, partial_zeta)
from .attack import (AttackOutcome, ChannelAssignment, QueryChannel, Strategy, VictimModel,
                     run_attack)
from .bounds import BoundInputs, corollary1_bound, theorem2_bounds
from .harness import ExperimentConfig, load_config, run_sweep

__version__ = "0.1.0"
