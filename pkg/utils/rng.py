"""
Counter-based random streams for reproducible parallel Monte Carlo.

Every episode owns a Philox stream keyed by the master seed. The episode index
occupies the high 64-bit word of the 256-bit counter, so streams never overlap
unless an episode consumes 2**192 blocks, and a stream depends only on
(master_seed, episode_index), never on how episodes are split across workers.
"""

import numpy as np

from utils.errors import InvalidParameterError

_SEED_LIMIT = 2**64
_INDEX_SHIFT = 192


def episode_rng(master_seed: int, episode_index: int) -> np.random.Generator:
    """
    Build the generator for one episode.

    Args:
        master_seed: 64-bit master seed of the run
        episode_index: Zero-based index of the episode

    Returns:
        numpy Generator backed by a Philox stream
    """
    if not 0 <= master_seed < _SEED_LIMIT:
        raise InvalidParameterError(f"master_seed must be a 64-bit unsigned integer, got {master_seed}")
    if not 0 <= episode_index < _SEED_LIMIT:
        raise InvalidParameterError(f"episode_index out of range: {episode_index}")
    bit_generator = np.random.Philox(key=master_seed, counter=episode_index << _INDEX_SHIFT)
    return np.random.Generator(bit_generator)
