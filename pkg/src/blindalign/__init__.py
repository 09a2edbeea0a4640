"""
Blind interference alignment for the K-user M x 1 MISO broadcast channel
with staggered antenna switching at the receivers.

The switching pattern and the transmit beamforming depend only on ``(M, K)``;
receivers cancel interference without channel knowledge. The package builds
both, simulates transmission over Gaussian channels, checks the alignment
ranks and estimates achievable rates and degrees of freedom.
"""

from .analysis import (AlignmentReport, RateCurve, closed_form_rate, dof_slope,
                       high_snr_approx, monte_carlo_rate, verify_alignment)
from .beamform import (BeamformingSchedule, PowerAllocation, build_beamforming,
                       stream_power)
from .channel import (ChannelRealization, EffectiveChannel, ReceivedBlock,
                      effective_channel, sample_channels, simulate_transmission)
from .config import SystemConfig
from .errors import (BlindAlignError, ConstructionError, DegenerateSubspace,
                     InvalidArgument, InvalidMatrix, InvalidPattern,
                     UnsupportedConfiguration)
from .matkernel import (RankReport, child_rng, log_det_hermitian_plus_identity,
                        numeric_rank, orthonormal_complement, sample_gaussian_matrix)
from .pattern import (AlignmentBlock, SwitchingPattern, block1_mode, build_supersymbol,
                      enumerate_alignment_blocks, supersymbol_length, verify_pattern)
from .receiver import (BlockProjector, ZFOutput, blind_cancel, build_block_projector,
                       build_projectors, zf_decode)

__version__ = "0.1.0"

__all__ = [
    "AlignmentBlock", "AlignmentReport", "BeamformingSchedule", "BlindAlignError",
    "BlockProjector", "ChannelRealization", "ConstructionError", "DegenerateSubspace",
    "EffectiveChannel", "InvalidArgument", "InvalidMatrix", "InvalidPattern",
    "PowerAllocation", "RankReport", "RateCurve", "ReceivedBlock", "SwitchingPattern",
    "SystemConfig", "UnsupportedConfiguration", "ZFOutput", "blind_cancel",
    "block1_mode", "build_beamforming", "build_block_projector", "build_projectors",
    "build_supersymbol", "child_rng", "closed_form_rate", "dof_slope",
    "effective_channel", "enumerate_alignment_blocks", "high_snr_approx",
    "log_det_hermitian_plus_identity", "monte_carlo_rate", "numeric_rank",
    "orthonormal_complement", "sample_channels", "sample_gaussian_matrix",
    "simulate_transmission", "stream_power", "supersymbol_length", "verify_alignment",
    "zf_decode",
]
