"""Offline ResNet-50 feature extractor: image folder -> DSEF feature file."""

from .extract import ExtractorConfig, ExtractSummary, extract_features
from .naming import DEFAULT_POWER_LOSS_REGEX, compile_pattern, parse_power_loss

__version__ = "0.1.0"
