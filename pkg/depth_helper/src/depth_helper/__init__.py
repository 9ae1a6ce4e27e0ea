"""depth_helper: batch monocular depth estimation to 16-bit PNG."""

from .estimate import (
    DEFAULT_MODEL_ID,
    Estimator,
    HelperConfig,
    ModelLoadError,
    Summary,
    estimate_depths,
    export_depth_png16,
    load_estimator,
    luma_depth,
)

__version__ = "0.1.0"
