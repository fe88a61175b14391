"""Detector catalog: taxonomy category, adapter kind, and modality per entry.

The registry is populated once at startup and treated as immutable after
that. Published models are listed as remote adapters; two native heuristics
keep every pipeline path exercisable without a model server.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from ..errors import ServiceError
from ..ingest import Modality


class DetectorCategory(str, Enum):
    backbone_only = "backbone_only"
    frequency_based = "frequency_based"
    spatial_based = "spatial_based"
    fairness_enhanced = "fairness_enhanced"
    audio_cnn = "audio_cnn"
    mllm_aware = "mllm_aware"


class AdapterKind(str, Enum):
    native_heuristic = "native_heuristic"
    remote_model = "remote_model"
    mllm_chat = "mllm_chat"


@dataclass(frozen=True)
class DetectorDescriptor:
    detector_id: str
    display_name: str
    modality: Modality
    category: DetectorCategory
    adapter_kind: AdapterKind
    version: str


class DetectorRegistry:
    def __init__(self):
        self._by_id: dict[str, DetectorDescriptor] = {}
        self._frozen = False

    def register(self, descriptor: DetectorDescriptor) -> None:
        if self._frozen:
            raise RuntimeError("registry is immutable after startup registration")
        if descriptor.detector_id in self._by_id:
            raise ValueError(f"duplicate detector_id: {descriptor.detector_id}")
        is_mllm_category = descriptor.category is DetectorCategory.mllm_aware
        is_chat_kind = descriptor.adapter_kind is AdapterKind.mllm_chat
        if is_mllm_category != is_chat_kind:
            raise ValueError(
                f"{descriptor.detector_id}: mllm_aware category and mllm_chat "
                "adapter kind must go together"
            )
        self._by_id[descriptor.detector_id] = descriptor

    def freeze(self) -> "DetectorRegistry":
        self._frozen = True
        return self

    def get(self, detector_id: str) -> DetectorDescriptor:
        try:
            return self._by_id[detector_id]
        except KeyError:
            raise ServiceError("unknown_detector", f"no detector {detector_id!r} is registered")

    def __contains__(self, detector_id: str) -> bool:
        return detector_id in self._by_id

    def list(self, modality: Modality | None = None) -> list[DetectorDescriptor]:
        items = [
            d for d in self._by_id.values()
            if modality is None or d.modality is modality
        ]
        return sorted(items, key=lambda d: d.detector_id)

    def ids(self) -> list[str]:
        return sorted(self._by_id)

    def chat_models(self) -> list[DetectorDescriptor]:
        return [d for d in self.list() if d.adapter_kind is AdapterKind.mllm_chat]


NATIVE_FREQUENCY_ID = "freq-heuristic-v1"
NATIVE_FLATNESS_ID = "audio-flatness-v1"
HYBRID_AUDIO_MODEL_ID = "whisper+qwen2-vl-2b"

_IMAGE_REMOTE = [
    ("xception", "Xception", DetectorCategory.backbone_only),
    ("efficientnet-b4", "EfficientNet-B4", DetectorCategory.backbone_only),
    ("vit-b16", "ViT-B/16", DetectorCategory.backbone_only),
    ("f3net", "F3Net", DetectorCategory.frequency_based),
    ("spsl", "SPSL", DetectorCategory.frequency_based),
    ("srm", "SRM", DetectorCategory.frequency_based),
    ("ucf", "UCF", DetectorCategory.spatial_based),
    ("core", "CORE", DetectorCategory.spatial_based),
    ("univfd", "UnivFD", DetectorCategory.spatial_based),
    ("daw-fdd", "DAW-FDD", DetectorCategory.fairness_enhanced),
    ("dag-fdd", "DAG-FDD", DetectorCategory.fairness_enhanced),
    ("pg-fdd", "PG-FDD", DetectorCategory.fairness_enhanced),
]

_CHAT_MODELS = [
    ("qwen-vl-chat", "Qwen-VL-Chat", Modality.image),
    ("llava-next-13b", "LLaVA-NeXT-13B", Modality.image),
    ("internvl-chat-v1.5", "InternVL-Chat-V1.5", Modality.image),
    (HYBRID_AUDIO_MODEL_ID, "Whisper + Qwen2-VL-2B", Modality.audio),
]


def build_default_registry() -> DetectorRegistry:
    registry = DetectorRegistry()
    for det_id, display, category in _IMAGE_REMOTE:
        registry.register(
            DetectorDescriptor(det_id, display, Modality.image, category,
                               AdapterKind.remote_model, "1.0")
        )
    registry.register(
        DetectorDescriptor("audio-cnn", "Audio CNN", Modality.audio,
                           DetectorCategory.audio_cnn, AdapterKind.remote_model, "1.0")
    )
    registry.register(
        DetectorDescriptor(NATIVE_FREQUENCY_ID, "Spectral Energy Heuristic",
                           Modality.image, DetectorCategory.frequency_based,
                           AdapterKind.native_heuristic, "1.0")
    )
    registry.register(
        DetectorDescriptor(NATIVE_FLATNESS_ID, "Spectral Flatness Heuristic",
                           Modality.audio, DetectorCategory.audio_cnn,
                           AdapterKind.native_heuristic, "1.0")
    )
    for det_id, display, modality in _CHAT_MODELS:
        registry.register(
            DetectorDescriptor(det_id, display, modality, DetectorCategory.mllm_aware,
                               AdapterKind.mllm_chat, "1.0")
        )
    return registry.freeze()
