"""Zero-range contact interactions at desk scale.

Channel functions of the 2+1 problem, mass thresholds and Efimov towers,
Monte-Carlo quadratic forms of the 2+2 problem, and a two-body laboratory
for shrinking potentials.
"""

__version__ = "0.1.0"

from .channels import ChannelFunction, ChannelSpec, Statistics, make_channel
from .errors import (
    AccuracyFailure,
    CalibrationFailure,
    InvalidArgument,
    NoSignChange,
    PrecisionWarning,
    ResolutionFailure,
    SearchFailure,
    SingularEvaluation,
)

__all__ = [
    "__version__",
    "ChannelFunction",
    "ChannelSpec",
    "Statistics",
    "make_channel",
    "AccuracyFailure",
    "CalibrationFailure",
    "InvalidArgument",
    "NoSignChange",
    "PrecisionWarning",
    "ResolutionFailure",
    "SearchFailure",
    "SingularEvaluation",
]
