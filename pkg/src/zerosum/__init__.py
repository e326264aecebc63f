"""Zero-sum parallel bus signaling toolkit.

Encodes data into balanced / bounded-disparity code words, drives them
through a modeled high-speed link (SST buffers, on-die PDN, via pinfield,
terminated transmission lines), and measures simultaneous-switching-noise
effects: vertical eye opening and supply ripple for single-ended,
quasi-differential, and zero-sum bus architectures.
"""

from .codec import (
    CodeBook,
    CodeWord,
    DisparityBound,
    SchemeKind,
    build_codebook,
    codes_with_offset,
    decode,
    disparity,
    effective_bits,
    encode,
    enumerate_codewords,
    load_codebook,
    save_codebook,
    traces_required,
    usable_bits,
)
from .errors import (
    CapacityError,
    ConfigError,
    DomainError,
    SingularNetworkError,
    SolverError,
    UnknownCodeWordError,
    ZeroSumError,
)
from .netlist import GROUND, Netlist, TlineDerivation, tline_lc_from_zo, via_inductance
from .slices import (
    BuiltSlice,
    LinkParams,
    OnDiePdnParams,
    PinfieldConfig,
    SliceConfig,
    SstBufferModel,
    build_slice_netlist,
)
from .solver import TransientConfig, WaveformSet, dc_operating_point, default_time_step, transient
from .stimulus import (
    DriveWaveform,
    LaneBitstreams,
    PatternSpec,
    generate_patterns,
    prbs7_stream,
    to_drive_waveforms,
    typical_patterns,
    worst_case_patterns,
)
from .analysis import (
    DifferentialEye,
    EyeMetrics,
    RippleMetrics,
    SliceSummary,
    default_settle_time,
    differential_eye,
    fold_eye,
    measure_eye,
    rail_ripple,
    summarize,
    vertical_eye_opening,
)

__version__ = "0.1.0"
