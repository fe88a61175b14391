"""Native heuristic detectors.

Honest desk-scale stand-ins for the published models, which run remotely:

- Image: fraction of non-DC spectral power above a radial frequency cutoff,
  squashed through a logistic. Synthetic upsampling artifacts skew spectra
  toward high frequencies; a constant image scores near zero.
- Audio: mean spectral flatness over Hann-windowed frames. Tonal (natural,
  voiced) signals score low; noise-like synthesis residue scores high.

Scores are demo-grade by declared intent; they exist so every pipeline path
is testable without a model server.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..errors import ServiceError
from ..ingest import DecodedAudio, DecodedImage

DECISION_THRESHOLD = 0.5

# Radial cutoff: a quarter of the maximum normalized radial frequency
# sqrt(0.5) reached at the corner Nyquist bin.
HF_RADIAL_CUTOFF = 0.25 * math.sqrt(0.5)
FREQ_STEEPNESS = 10.0
FREQ_MIDPOINT = 0.5

FRAME_SIZE = 1024
HOP_SIZE = 512
FLATNESS_EPS = 1e-12
FLATNESS_STEEPNESS = 8.0
FLATNESS_MIDPOINT = 0.3


class Label(str, Enum):
    real = "real"
    fake = "fake"


@dataclass(frozen=True)
class FaceRegion:
    x: int
    y: int
    w: int
    h: int
    score: float


@dataclass(frozen=True)
class DetectionResult:
    label: Label
    score: float
    faces: list[FaceRegion] | None
    latency_ms: int


def classify_score(score: float) -> Label:
    return Label.fake if score >= DECISION_THRESHOLD else Label.real


def logistic(x: float, steepness: float, midpoint: float) -> float:
    return 1.0 / (1.0 + math.exp(-steepness * (x - midpoint)))


# -- image: high-frequency spectral energy ratio ---------------------------

def radial_frequency_grid(height: int, width: int) -> np.ndarray:
    """Normalized radial frequency per DFT bin, folding conjugate bins."""
    u = np.arange(height)
    v = np.arange(width)
    fu = np.minimum(u, height - u) / height
    fv = np.minimum(v, width - v) / width
    return np.sqrt(fu[:, None] ** 2 + fv[None, :] ** 2)


def high_frequency_ratio(luma: np.ndarray, cutoff: float = HF_RADIAL_CUTOFF) -> float:
    """Share of non-DC spectral power above the radial cutoff; 0 if no power."""
    spectrum = np.fft.fft2(luma)
    power = np.abs(spectrum) ** 2
    power[0, 0] = 0.0
    total = float(power.sum())
    if total <= 0.0:
        return 0.0
    rho = radial_frequency_grid(*luma.shape)
    return float(power[rho > cutoff].sum() / total)


def run_frequency_detector(
    image: DecodedImage,
    steepness: float = FREQ_STEEPNESS,
    midpoint: float = FREQ_MIDPOINT,
) -> DetectionResult:
    start = time.perf_counter()
    ratio = high_frequency_ratio(image.luma)
    score = logistic(ratio, steepness, midpoint)
    latency_ms = int((time.perf_counter() - start) * 1000)
    return DetectionResult(
        label=classify_score(score), score=score, faces=None, latency_ms=latency_ms
    )


# -- audio: mean spectral flatness ------------------------------------------

def hann_window(size: int = FRAME_SIZE) -> np.ndarray:
    return np.hanning(size)


def frame_starts(sample_count: int, frame: int = FRAME_SIZE, hop: int = HOP_SIZE) -> range:
    return range(0, sample_count - frame + 1, hop)


def spectral_flatness_frames(
    samples: np.ndarray,
    frame: int = FRAME_SIZE,
    hop: int = HOP_SIZE,
    eps: float = FLATNESS_EPS,
) -> np.ndarray:
    """Per-frame flatness = exp(mean(ln(P+eps))) / (mean(P)+eps).

    A frame whose spectrum is identically zero has flatness exactly 1 (the
    eps/eps convention for digital silence).
    """
    if len(samples) < frame:
        raise ServiceError("too_short", f"audio must have at least {frame} samples")
    window = hann_window(frame)
    values = []
    for start in frame_starts(len(samples), frame, hop):
        segment = samples[start : start + frame] * window
        power = np.abs(np.fft.rfft(segment)) ** 2
        if not power.any():
            values.append(1.0)
            continue
        geometric = math.exp(float(np.mean(np.log(power + eps))))
        values.append(geometric / (float(np.mean(power)) + eps))
    return np.asarray(values, dtype=np.float64)


def mean_spectral_flatness(samples: np.ndarray) -> float:
    return float(np.mean(spectral_flatness_frames(samples)))


def run_flatness_detector(
    audio: DecodedAudio,
    steepness: float = FLATNESS_STEEPNESS,
    midpoint: float = FLATNESS_MIDPOINT,
) -> DetectionResult:
    start = time.perf_counter()
    flatness = mean_spectral_flatness(audio.samples)
    score = logistic(flatness, steepness, midpoint)
    latency_ms = int((time.perf_counter() - start) * 1000)
    return DetectionResult(
        label=classify_score(score), score=score, faces=None, latency_ms=latency_ms
    )
