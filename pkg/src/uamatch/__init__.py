"""Distributed user-association matching games for two-tier HetNets.

A desk-scale system simulator: clustered mmWave + Gaussian sub-6 channels,
beamformed association-dependent rates, the deferred-acceptance and
early-acceptance matching games with full message traces, a multi-game
max-throughput wrapper, baseline schemes, and a Monte-Carlo runner.
"""

from .netmodel import (
    UNASSOCIATED,
    BaseStation,
    LoadScenario,
    Topology,
    TopologyParams,
    UserEquipment,
    activation_set,
    build_topology,
    classify_load,
    unassociated_set,
    validate_association,
)
from .channel import (
    ChannelParams,
    ChannelRealization,
    ChannelSet,
    ClusterParams,
    PathLossParams,
    gen_mmwave_channel,
    gen_sub6_channel,
    generate_channels,
    large_scale_gain,
    upa_response,
)
from .beamrate import (
    BeamformerSet,
    RateContext,
    build_rate_context,
    compute_beamformers,
    effective_channel,
    empty_beta,
)
from .prefs import (
    PreferenceLists,
    build_by_channel_norm,
    build_by_cqi,
    build_by_rate,
    from_values,
    sinr_include_mask,
    sinr_to_cqi,
)
from .games import (
    DA,
    EA_BASE,
    EA_PLU,
    EA_PLU_RA,
    GAME_RUNNERS,
    GameInput,
    GameResult,
    GameTrace,
    is_stable,
    run_da,
    run_ea_base,
    run_ea_plu,
    run_ea_plu_ra,
    write_event_log,
)
from .multigame import MultiGameConfig, TrackerState, run_multigame, tracker_update
from .baselines import (
    brute_force_optimal,
    centralized_swap,
    max_sinr_association,
    random_association,
)
from .metrics import (
    Aggregate,
    TrialMetrics,
    aggregate,
    association_delay,
    association_power,
    trial_metrics,
    unassociated_percentage,
)

__version__ = "0.1.0"
