"""flowsim: simulated optical-flow dataset generation from depth maps."""

from .core import (
    AugmentationParams,
    AxisParams,
    DepthMap,
    InvalidInputError,
    MotionField,
    RawDepthMap,
    SampleSeed,
    SplitMix64,
    Stage,
    depth_to_motion,
    derive_sample_seed,
    normalize_depth,
    reverse_map,
    sample_augmentation,
    scale_map,
    shift_map,
    zero_motion,
)
from .flowio import (
    FormatError,
    TruncatedFileError,
    encode_flo,
    encode_png_rgb,
    read_depth_auto,
    read_depth_pfm,
    read_depth_png16,
    read_flo,
    read_png_rgb,
    write_depth_png16,
    write_flo,
    write_png_gray8,
    write_png_rgb,
)
from .flowviz import (
    ColorWheel,
    FlowImage,
    build_color_wheel,
    channel_to_gray,
    depth_to_gray,
    flow_to_color,
    render_flow,
    unit_normalize,
)
from .pipeline import (
    ConfigurationError,
    DatasetConfig,
    DatasetManifest,
    MatchResult,
    PipelineError,
    SampleRecord,
    generate_sample,
    match_pairs,
    run_dataset,
    simulate_video_flows,
)

__version__ = "0.1.0"
