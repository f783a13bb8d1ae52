"""Streaming sensing toolkit: MFCC + linear-SVM voice activity detection,
RSSI proximity, a dyadic-interaction recording trigger, multimodal emotion
features, and a seeded simulation harness."""

__version__ = "0.1.0"
