from .native import (
    DECISION_THRESHOLD,
    DetectionResult,
    FaceRegion,
    Label,
    classify_score,
    high_frequency_ratio,
    mean_spectral_flatness,
    run_flatness_detector,
    run_frequency_detector,
    spectral_flatness_frames,
)
from .registry import (
    AdapterKind,
    DetectorCategory,
    DetectorDescriptor,
    DetectorRegistry,
    HYBRID_AUDIO_MODEL_ID,
    NATIVE_FLATNESS_ID,
    NATIVE_FREQUENCY_ID,
    build_default_registry,
)
from .remote import RemoteDetectorClient, parse_infer_response

__all__ = [
    "AdapterKind",
    "DECISION_THRESHOLD",
    "DetectionResult",
    "DetectorCategory",
    "DetectorDescriptor",
    "DetectorRegistry",
    "FaceRegion",
    "HYBRID_AUDIO_MODEL_ID",
    "Label",
    "NATIVE_FLATNESS_ID",
    "NATIVE_FREQUENCY_ID",
    "RemoteDetectorClient",
    "build_default_registry",
    "classify_score",
    "high_frequency_ratio",
    "mean_spectral_flatness",
    "parse_infer_response",
    "run_flatness_detector",
    "run_frequency_detector",
    "spectral_flatness_frames",
]
