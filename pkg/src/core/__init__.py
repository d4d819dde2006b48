"""MFEA core: policy networks, the unified genome and the evolutionary engine.

``evaluator`` is imported from its module directly; it depends on
``src.environments``, which itself imports ``core.seeding``.
"""

from .mfea import MfeaConfig, MfeaEngine, MfeaResult, run_mfea
from .policy_net import Activation, Architecture, PolicyNetwork
from .seeding import derive_seed, make_rng
from .unified_genome import PartitionMap, build_partition_map, decode, encode, random_genome

__all__ = [
    "Activation",
    "Architecture",
    "MfeaConfig",
    "MfeaEngine",
    "MfeaResult",
    "PartitionMap",
    "PolicyNetwork",
    "build_partition_map",
    "decode",
    "derive_seed",
    "encode",
    "make_rng",
    "random_genome",
    "run_mfea",
]
