"""Link-level simulator for uncoordinated cooperative OFDM relaying.

Relays repeat a source block through individually drawn virtual transmit
channels (truncated all-pass cascades or block phase dithering) over a
distributed Alamouti space-time code, so their superposed uplink keeps
spatial diversity without any coordination.
"""

from .channel import ChannelConfig, apply_uplink, draw_rician
from .harness import (
    BlockCounts,
    FlatnessReport,
    ScenarioConfig,
    SweepResult,
    SweepRow,
    config_digest,
    diagnostic_uncoded_awgn,
    flatness_report,
    pole_modulus_study,
    qpsk_awgn_ber_theory,
    read_results,
    run_block_trial,
    run_sweep,
    write_flatness,
    write_results,
)
from .stbc import (
    CompositeChannel,
    StbcConfig,
    alamouti_combine,
    alamouti_matrix,
    composite_channel,
    estimate_cyclic,
    estimate_ls,
    stbc_encode,
)
from .vchan import ApfConfig, VirtualChannelMatrix, generate_apf_vchan, generate_dither_vchan

__version__ = "0.1.0"
