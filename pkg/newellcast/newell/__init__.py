"""Newell shift estimators and physics-based feature construction"""

from .models import (
    EstimatorKind,
    FeatureTensor,
    FeatureVariant,
    RelativePosition,
    Side,
    relative_position,
)
from .shifts import (
    congested_shift_downstream,
    congested_shift_upstream,
    ff_shift_downstream,
    ff_shift_upstream,
    newell_min,
)
from .features import (
    build_feature_tensor,
    build_feature_windows,
    channel_count,
    check_variant,
    estimator_channels,
)

__all__ = [
    "EstimatorKind",
    "FeatureTensor",
    "FeatureVariant",
    "RelativePosition",
    "Side",
    "relative_position",
    "congested_shift_downstream",
    "congested_shift_upstream",
    "ff_shift_downstream",
    "ff_shift_upstream",
    "newell_min",
    "build_feature_tensor",
    "build_feature_windows",
    "channel_count",
    "check_variant",
    "estimator_channels",
]
